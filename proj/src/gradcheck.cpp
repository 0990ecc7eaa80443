#include "seqlab/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "seqlab/batch.hpp"
#include "seqlab/model.hpp"

namespace seqlab {

double gradcheck_relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

std::string random_word(RngStream& rng) {
  std::string w;
  const std::size_t len = 1 + rng.below(3);
  for (std::size_t i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + rng.below(4)));
  return w;
}

}  // namespace

GradCheckReport run_gradcheck(const GradCheckOptions& o) {
  RngStream rng = RngStream::derive({o.seed, 0x6C});

  // Half the toy vocabulary has vectors; the rest exercises the unknown row.
  EmbeddingTable table(o.word_dim, CaseMode::kCased);
  for (int k = 0; k < 6; ++k) {
    Vec v(o.word_dim);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    table.add(random_word(rng), v);
  }

  LabelVocab labels;
  for (std::size_t k = 0; k < o.labels; ++k) labels.add("L" + std::to_string(k));

  std::vector<Sentence> batch(o.sentences);
  for (auto& s : batch) {
    const std::size_t n = 1 + rng.below(o.max_length);
    for (std::size_t t = 0; t < n; ++t) s.tokens.push_back({random_word(rng), rng.below(o.labels)});
  }

  TrainConfig cfg;
  cfg.byte_dim = o.byte_dim;
  cfg.byte_hidden = o.byte_hidden;
  cfg.word_hidden = o.word_hidden;
  cfg.use_bytes = o.use_bytes;
  cfg.use_words = o.use_words;
  cfg.use_crf = o.use_crf;
  cfg.dropout_rate = o.dropout_rate;
  cfg.seed = o.seed;

  Model model(cfg, labels, EmbeddingInfo::of(table));
  model.init(rng);
  // Move every tensor (biases included) off its structured initial value.
  for (Param* p : model.params())
    for (auto& v : p->value.data()) v += rng.uniform(-0.3, 0.3);

  BatchOptions options;
  options.mode = o.dropout_rate > 0.0 ? Mode::kTrain : Mode::kInfer;
  options.key = {o.seed, 1, 0};

  model.zero_grad();
  accumulate_gradients(model, &table, batch, options);

  auto loss_at = [&] {
    BatchGraph graph(model, &table, batch, options);
    return batch_loss(model, batch, graph.scores()).loss;
  };

  GradCheckReport report;
  for (Param* p : model.params()) {
    TensorCheck check;
    check.name = p->name;
    auto& values = p->value.data();
    const auto& grads = p->grad.data();
    check.entries = values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + o.step;
      const double up = loss_at();
      values[i] = saved - o.step;
      const double down = loss_at();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * o.step);
      double analytic = grads[i];
      if (p->name == o.corrupt_tensor && i == 0) analytic += 1.0;
      check.max_rel_error = std::max(check.max_rel_error, gradcheck_relative_error(analytic, numeric));
    }
    check.passed = check.max_rel_error < o.tolerance;
    report.passed = report.passed && check.passed;
    report.tensors.push_back(std::move(check));
  }
  return report;
}

void write_gradcheck_report(std::ostream& out, const GradCheckReport& report) {
  char buf[256];
  for (const auto& t : report.tensors) {
    std::snprintf(buf, sizeof buf, "%-24s %6zu entries  max rel error %.3e  %s\n", t.name.c_str(), t.entries,
                  t.max_rel_error, t.passed ? "ok" : "FAIL");
    out << buf;
  }
  out << (report.passed ? "gradient check passed\n" : "gradient check FAILED\n");
}

}  // namespace seqlab
