#include "seqlab/train.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "seqlab/error.hpp"
#include "seqlab/eval.hpp"

namespace seqlab {

EarlyStopMetric parse_metric(std::string_view name) {
  if (name == "entity_f1" || name == "f1") return EarlyStopMetric::kEntityF1;
  if (name == "token_accuracy" || name == "accuracy") return EarlyStopMetric::kTokenAccuracy;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

std::string_view metric_name(EarlyStopMetric metric) {
  return metric == EarlyStopMetric::kEntityF1 ? "entity_f1" : "token_accuracy";
}

void TrainConfig::validate() const {
  if (!use_bytes && !use_words) throw ConfigError("at least one of use_bytes/use_words must be true");
  if (!(eta0 > 0.0)) throw ConfigError("eta0 must be positive");
  if (!(rho >= 0.0)) throw ConfigError("rho must be non-negative");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (byte_dim == 0 || byte_hidden == 0 || word_hidden == 0)
    throw ConfigError("layer sizes must be positive");
  check_dropout_rate(dropout_rate);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(value) + "' for " + std::string(key));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void set_config_value(TrainConfig& c, std::string_view key, std::string_view value) {
  if (key == "eta0") c.eta0 = parse_number<double>(key, value);
  else if (key == "rho") c.rho = parse_number<double>(key, value);
  else if (key == "epochs") c.epochs = parse_number<std::size_t>(key, value);
  else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, value);
  else if (key == "dropout_rate") c.dropout_rate = parse_number<double>(key, value);
  else if (key == "d_b" || key == "byte_dim") c.byte_dim = parse_number<std::size_t>(key, value);
  else if (key == "byte_hidden") c.byte_hidden = parse_number<std::size_t>(key, value);
  else if (key == "word_hidden") c.word_hidden = parse_number<std::size_t>(key, value);
  else if (key == "use_bytes") c.use_bytes = parse_bool(key, value);
  else if (key == "use_words") c.use_words = parse_bool(key, value);
  else if (key == "use_crf") c.use_crf = parse_bool(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "early_stop_metric") c.early_stop_metric = parse_metric(value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

TrainConfig parse_config(std::istream& in) {
  TrainConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    try {
      set_config_value(config, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

void write_config(std::ostream& out, const TrainConfig& c) {
  out << "eta0 = " << format_double(c.eta0) << '\n'
      << "rho = " << format_double(c.rho) << '\n'
      << "epochs = " << c.epochs << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "dropout_rate = " << format_double(c.dropout_rate) << '\n'
      << "d_b = " << c.byte_dim << '\n'
      << "byte_hidden = " << c.byte_hidden << '\n'
      << "word_hidden = " << c.word_hidden << '\n'
      << "use_bytes = " << (c.use_bytes ? "true" : "false") << '\n'
      << "use_words = " << (c.use_words ? "true" : "false") << '\n'
      << "use_crf = " << (c.use_crf ? "true" : "false") << '\n'
      << "seed = " << c.seed << '\n'
      << "early_stop_metric = " << metric_name(c.early_stop_metric) << '\n';
}

double lr_for_epoch(double eta0, double rho, std::size_t epoch) {
  if (epoch < 1) throw ConfigError("epochs are counted from 1");
  return eta0 / (1.0 + rho * static_cast<double>(epoch - 1));
}

AdamState::AdamState(std::span<Param* const> params) {
  m.reserve(params.size());
  v.reserve(params.size());
  for (const Param* p : params) {
    m.emplace_back(p->rows(), p->cols(), 0.0);
    v.emplace_back(p->rows(), p->cols(), 0.0);
  }
}

void adam_step(AdamState& state, std::span<Param* const> params, double lr) {
  if (state.m.size() != params.size()) throw ShapeError("adam state does not match parameter list");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param& p = *params[k];
    if (p.grad.size() != p.value.size() || state.m[k].size() != p.value.size())
      throw ShapeError("adam: shape mismatch for " + p.name);
    if (!p.trainable) continue;
    auto& value = p.value.data();
    const auto& grad = p.grad.data();
    auto& m = state.m[k].data();
    auto& v = state.v[k].data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

double evaluate_metric(const Model& model, const EmbeddingTable* table,
                       std::span<const Sentence> sentences, EarlyStopMetric metric) {
  if (sentences.empty()) return 0.0;
  const auto predicted = predict(model, table, sentences);
  Labeling gold, pred;
  gold.reserve(sentences.size());
  pred.reserve(sentences.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    std::vector<std::string> g, p;
    for (std::size_t t = 0; t < sentences[s].tokens.size(); ++t) {
      const auto& label = sentences[s].tokens[t].label;
      g.push_back(label ? model.labels.label(*label) : std::string("O"));
      p.push_back(model.labels.label(predicted[s][t]));
    }
    gold.push_back(std::move(g));
    pred.push_back(std::move(p));
  }
  if (metric == EarlyStopMetric::kTokenAccuracy) return token_accuracy(gold, pred);
  return entity_prf(gold, pred, SchemeKind::kIobes).total.f1;
}

TrainResult run_training(const TrainConfig& config, const Corpus& train, const Corpus& dev,
                         const EmbeddingTable* table, const EpochCallback& on_epoch) {
  config.validate();
  if (train.sentences.empty()) throw TrainingError("training corpus is empty");
  if (dev.sentences.empty()) throw TrainingError("development corpus is empty");
  if (!(train.labels == dev.labels))
    throw TrainingError("training and development corpora must share one label vocabulary");
  if (config.use_words && !table) throw TrainingError("word embeddings enabled but none supplied");

  EmbeddingInfo info = table ? EmbeddingInfo::of(*table) : EmbeddingInfo{};
  Model model(config, train.labels, info);
  RngStream init_rng = RngStream::derive({config.seed, 0x1417});
  model.init(init_rng);

  auto params = model.params();
  AdamState adam(params);

  TrainResult result;
  result.model = model;
  double best_metric = -1.0;

  std::vector<std::size_t> order(train.sentences.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Sentence> batch;
  batch.reserve(config.batch_size);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = lr_for_epoch(config.eta0, config.rho, epoch);
    RngStream shuffle = RngStream::derive({config.seed, 0x5F, epoch});
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[shuffle.below(i + 1)]);

    EpochRecord record;
    record.epoch = epoch;
    record.learning_rate = lr;
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      batch.clear();
      for (std::size_t k = begin; k < end; ++k) batch.push_back(train.sentences[order[k]]);
      model.zero_grad();
      BatchOptions options;
      options.mode = Mode::kTrain;
      options.key = {config.seed, epoch, batch_index};
      const double loss = accumulate_gradients(model, table, batch, options);
      if (!std::isfinite(loss))
        throw TrainingError("non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      adam_step(adam, params, lr);
      loss_sum += loss;
      ++record.optimizer_steps;
    }
    record.train_loss = loss_sum / static_cast<double>(record.optimizer_steps);
    record.dev_metric = evaluate_metric(model, table, dev.sentences, config.early_stop_metric);
    if (record.dev_metric > best_metric) {
      best_metric = record.dev_metric;
      result.history.best_epoch = epoch;
      result.model = model;
    }
    result.history.epochs.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  for (Param* p : result.model.params()) p->zero_grad();
  return result;
}

}  // namespace seqlab
