#include "seqlab/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "seqlab/batch.hpp"
#include "seqlab/corpus.hpp"
#include "seqlab/error.hpp"
#include "seqlab/eval.hpp"
#include "seqlab/gradcheck.hpp"
#include "seqlab/persist.hpp"
#include "seqlab/train.hpp"

namespace seqlab {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Opens `path`, or returns `fallback` for "-".
std::istream& open_input(const std::string& path, std::ifstream& file, std::istream& fallback) {
  if (path == "-") return fallback;
  file.open(path);
  if (!file) throw Error("cannot open " + path);
  return file;
}

Corpus read_corpus(const std::string& path, const ColumnSpec& columns) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_conll(in, columns);
}

std::size_t resolve(int column, std::size_t size) {
  const long long idx = column < 0 ? static_cast<long long>(size) + column : column;
  if (idx < 0 || static_cast<std::size_t>(idx) >= size) throw Error("column index out of range");
  return static_cast<std::size_t>(idx);
}

struct TrainArgs {
  std::string config, train, dev, embeddings, out, history, scheme;
  std::string case_mode = "cased";
  std::optional<std::size_t> embedding_dim;
  std::optional<double> dev_fraction;
  int token_column = 0;
  int label_column = -1;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  if (a.dev.empty() && !a.dev_fraction) throw UsageError("either --dev or --dev-fraction is required");
  TrainConfig config = a.config.empty() ? TrainConfig{} : load_config(a.config);
  const SchemeKind scheme = parse_scheme(a.scheme);
  if (scheme == SchemeKind::kRaw && config.early_stop_metric == EarlyStopMetric::kEntityF1) {
    if (!a.quiet) err << "note: RAW labels have no chunks; early stopping on token accuracy\n";
    config.early_stop_metric = EarlyStopMetric::kTokenAccuracy;
  }
  const SchemeKind target = scheme == SchemeKind::kRaw ? SchemeKind::kRaw : SchemeKind::kIobes;
  const ColumnSpec columns{a.token_column, a.label_column, true};

  Corpus train = convert_corpus(read_corpus(a.train, columns), scheme, target);
  Corpus dev;
  if (!a.dev.empty()) {
    dev = convert_corpus(read_corpus(a.dev, columns), scheme, target);
  } else {
    Split split = dev_split(train.sentences, *a.dev_fraction, config.seed);
    dev.sentences = std::move(split.dev);
    dev.labels = train.labels;
    train.sentences = std::move(split.train);
  }
  LabelVocab labels;
  remap_labels(train, labels);
  remap_labels(dev, labels);
  train.labels = labels;

  std::optional<EmbeddingTable> table;
  if (config.use_words) {
    if (a.embeddings.empty()) throw UsageError("--embeddings is required when use_words is true");
    table = load_text_embeddings(a.embeddings, parse_case_mode(a.case_mode), a.embedding_dim);
  }

  if (!a.quiet)
    err << "training on " << train.sentences.size() << " sentences (" << train.token_count()
        << " tokens), dev " << dev.sentences.size() << ", " << labels.size() << " labels\n";
  auto log = [&](const EpochRecord& r) {
    if (a.quiet) return;
    char buf[160];
    std::snprintf(buf, sizeof buf, "epoch %3zu  lr %.6g  loss %.6f  dev %s %.4f\n", r.epoch, r.learning_rate,
                  r.train_loss, std::string(metric_name(config.early_stop_metric)).c_str(), r.dev_metric);
    err << buf;
  };
  TrainResult result = run_training(config, train, dev, table ? &*table : nullptr, log);
  save_model(result.model, a.out);

  const std::string history_path = a.history.empty() ? a.out + ".history.tsv" : a.history;
  std::ofstream history(history_path);
  if (!history) throw Error("cannot write " + history_path);
  history << "epoch\tlr\ttrain_loss\tdev_" << metric_name(config.early_stop_metric) << "\tbest\n";
  char buf[160];
  for (const auto& r : result.history.epochs) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\t%.17g\t%s\n", r.epoch, r.learning_rate, r.train_loss,
                  r.dev_metric, r.epoch == result.history.best_epoch ? "*" : "");
    history << buf;
  }
  out << "best epoch " << result.history.best_epoch << " of " << result.history.epochs.size() << "; model written to "
      << a.out << '\n';
  return kExitOk;
}

struct TagArgs {
  std::string model, input = "-", embeddings, output_scheme = "IOBES";
  int token_column = 0;
  bool constrained = false;
};

int cmd_tag(const TagArgs& a, std::istream& in, std::ostream& out) {
  const ModelHeader header = read_model_header(a.model);
  std::optional<EmbeddingTable> table;
  if (header.config.use_words) {
    if (a.embeddings.empty()) throw UsageError("this model needs --embeddings");
    table = load_text_embeddings(a.embeddings, header.embedding.case_mode, header.embedding.dim);
  }
  const Model model = load_model(a.model, table ? &*table : nullptr);

  std::ifstream file;
  const auto blocks = read_conll_blocks(open_input(a.input, file, in));
  std::vector<Sentence> sentences;
  sentences.reserve(blocks.size());
  for (const auto& b : blocks) {
    Sentence s;
    for (std::size_t r = 0; r < b.rows.size(); ++r) {
      const auto& row = b.rows[r];
      const std::size_t col = resolve(a.token_column, row.size());
      if (row[col].find_first_of("\x01\x02") != std::string::npos)
        throw ParseError("token contains reserved control byte 0x01 or 0x02", b.lines[r]);
      s.tokens.push_back({row[col], std::nullopt});
    }
    sentences.push_back(std::move(s));
  }

  const auto predicted = predict(model, table ? &*table : nullptr, sentences, 64, a.constrained);
  const SchemeKind out_scheme = parse_scheme(a.output_scheme);
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    std::vector<std::string> labels;
    for (auto y : predicted[s]) labels.push_back(model.labels.label(y));
    if (out_scheme == SchemeKind::kIob1 || out_scheme == SchemeKind::kIob2)
      labels = convert_scheme(labels, SchemeKind::kIobes, out_scheme);
    for (std::size_t r = 0; r < blocks[s].rows.size(); ++r) {
      for (const auto& col : blocks[s].rows[r]) out << col << ' ';
      out << labels[r] << '\n';
    }
    out << '\n';
  }
  return kExitOk;
}

struct EvalArgs {
  std::string gold, pred, scheme = "IOBES", metric = "f1";
  int gold_column = -1;
  int pred_column = -1;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const SchemeKind scheme = parse_scheme(a.scheme);
  const EarlyStopMetric metric = parse_metric(a.metric);
  std::ifstream gf(a.gold), pf(a.pred);
  if (!gf) throw Error("cannot open " + a.gold);
  if (!pf) throw Error("cannot open " + a.pred);
  const auto gold_blocks = read_conll_blocks(gf);
  const auto pred_blocks = read_conll_blocks(pf);

  Labeling gold, pred;
  const std::size_t blocks = std::max(gold_blocks.size(), pred_blocks.size());
  for (std::size_t b = 0; b < blocks; ++b) {
    if (b >= gold_blocks.size() || b >= pred_blocks.size()) {
      const std::size_t line = b < pred_blocks.size() ? pred_blocks[b].lines.front() : gold_blocks[b].lines.front();
      err << "error: files diverge at line " << line << " (sentence count differs)\n";
      return kExitDataError;
    }
    const auto& g = gold_blocks[b];
    const auto& p = pred_blocks[b];
    std::vector<std::string> gl, pl;
    for (std::size_t r = 0; r < std::max(g.rows.size(), p.rows.size()); ++r) {
      if (r >= g.rows.size() || r >= p.rows.size() || g.rows[r].front() != p.rows[r].front()) {
        const std::size_t line = r < p.rows.size() ? p.lines[r] : p.lines.back() + 1;
        err << "error: files diverge at line " << line << '\n';
        return kExitDataError;
      }
      gl.push_back(g.rows[r][resolve(a.gold_column, g.rows[r].size())]);
      pl.push_back(p.rows[r][resolve(a.pred_column, p.rows[r].size())]);
    }
    gold.push_back(std::move(gl));
    pred.push_back(std::move(pl));
  }

  if (metric == EarlyStopMetric::kTokenAccuracy) {
    std::size_t total = 0;
    for (const auto& s : gold) total += s.size();
    const double acc = token_accuracy(gold, pred);
    char buf[128];
    std::snprintf(buf, sizeof buf, "accuracy: %.4f (%zu tokens)\n", acc, total);
    out << buf;
  } else {
    const EntityReport report = entity_prf(gold, pred, scheme);
    char buf[160];
    std::snprintf(buf, sizeof buf, "precision: %.4f  recall: %.4f  f1: %.4f  (tp %zu, fp %zu, fn %zu)\n",
                  report.total.precision, report.total.recall, report.total.f1, report.total.tp,
                  report.total.fp, report.total.fn);
    out << buf;
    write_conlleval_report(out, report);
  }
  return kExitOk;
}

struct ConvertArgs {
  std::string from, to, input = "-";
  int column = -1;
};

int cmd_convert(const ConvertArgs& a, std::istream& in, std::ostream& out) {
  const SchemeKind from = parse_scheme(a.from);
  const SchemeKind to = parse_scheme(a.to);
  std::ifstream file;
  const auto blocks = read_conll_blocks(open_input(a.input, file, in));
  for (const auto& b : blocks) {
    std::vector<std::string> labels;
    std::vector<std::size_t> cols;
    for (const auto& row : b.rows) {
      cols.push_back(resolve(a.column, row.size()));
      labels.push_back(row[cols.back()]);
    }
    std::vector<std::string> converted;
    try {
      converted = convert_scheme(labels, from, to);
    } catch (const ConversionError& e) {
      throw ParseError(e.what(), b.lines[e.position()]);
    }
    for (std::size_t r = 0; r < b.rows.size(); ++r) {
      for (std::size_t c = 0; c < b.rows[r].size(); ++c) {
        if (c) out << ' ';
        out << (c == cols[r] ? converted[r] : b.rows[r][c]);
      }
      out << '\n';
    }
    out << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Byte/word Bi-LSTM-CRF sequence labeler"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model with early stopping on a dev set");
  train_cmd->add_option("--config", train.config, "key = value training config")->check(CLI::ExistingFile);
  train_cmd->add_option("--train", train.train, "training corpus (CoNLL columns)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--dev", train.dev, "development corpus")->check(CLI::ExistingFile);
  train_cmd->add_option("--dev-fraction", train.dev_fraction, "hold out this fraction of --train as dev");
  train_cmd->add_option("--embeddings", train.embeddings, "word vectors, one token + values per line")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--case", train.case_mode, "embedding case mode")->check(CLI::IsMember({"cased", "uncased"}));
  train_cmd->add_option("--embedding-dim", train.embedding_dim, "expected embedding dimension");
  train_cmd->add_option("--scheme", train.scheme, "tagging scheme of the corpus: IOB1, IOB2, IOBES, RAW")->required();
  train_cmd->add_option("--token-column", train.token_column, "token column (negative counts from the end)");
  train_cmd->add_option("--label-column", train.label_column, "label column (negative counts from the end)");
  train_cmd->add_option("--out", train.out, "model output path")->required();
  train_cmd->add_option("--history", train.history, "history report path (default <out>.history.tsv)");
  train_cmd->add_flag("--quiet", train.quiet, "no progress output");

  TagArgs tag;
  auto* tag_cmd = app.add_subcommand("tag", "Label tokenized sentences");
  tag_cmd->add_option("--model", tag.model, "model file")->required()->check(CLI::ExistingFile);
  tag_cmd->add_option("--input", tag.input, "CoNLL input, '-' for stdin");
  tag_cmd->add_option("--embeddings", tag.embeddings, "word vectors the model was trained with")->check(CLI::ExistingFile);
  tag_cmd->add_option("--token-column", tag.token_column, "token column");
  tag_cmd->add_option("--output-scheme", tag.output_scheme, "scheme of emitted labels");
  tag_cmd->add_flag("--constrained", tag.constrained, "forbid illegal IOBES transitions when decoding");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted labels against gold labels");
  eval_cmd->add_option("--gold", eval.gold, "gold CoNLL file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--pred", eval.pred, "predicted CoNLL file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--scheme", eval.scheme, "tagging scheme");
  eval_cmd->add_option("--metric", eval.metric, "f1 or accuracy")->check(CLI::IsMember({"f1", "entity_f1", "accuracy", "token_accuracy"}));
  eval_cmd->add_option("--gold-column", eval.gold_column, "label column in the gold file");
  eval_cmd->add_option("--pred-column", eval.pred_column, "label column in the predicted file");

  ConvertArgs convert;
  auto* convert_cmd = app.add_subcommand("convert", "Convert a label column between tagging schemes");
  convert_cmd->add_option("--from", convert.from, "source scheme")->required();
  convert_cmd->add_option("--to", convert.to, "target scheme")->required();
  convert_cmd->add_option("--input", convert.input, "CoNLL input, '-' for stdin");
  convert_cmd->add_option("--column", convert.column, "label column");

  GradCheckOptions gc;
  bool no_crf = false, no_bytes = false, no_words = false;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  gc_cmd->add_option("--seed", gc.seed, "random seed");
  gc_cmd->add_option("--sentences", gc.sentences, "sentences in the toy batch");
  gc_cmd->add_option("--length", gc.max_length, "maximum sentence length")->check(CLI::Range(1, 3));
  gc_cmd->add_option("--labels", gc.labels, "label count")->check(CLI::Range(1, 4));
  gc_cmd->add_option("--byte-dim", gc.byte_dim, "byte projection size");
  gc_cmd->add_option("--byte-hidden", gc.byte_hidden, "byte LSTM size")->check(CLI::Range(1, 4));
  gc_cmd->add_option("--word-hidden", gc.word_hidden, "word LSTM size")->check(CLI::Range(1, 4));
  gc_cmd->add_option("--word-dim", gc.word_dim, "word vector size");
  gc_cmd->add_option("--dropout", gc.dropout_rate, "check with replayed dropout masks");
  gc_cmd->add_flag("--no-crf", no_crf, "softmax objective");
  gc_cmd->add_flag("--no-bytes", no_bytes, "word embeddings only");
  gc_cmd->add_flag("--no-words", no_words, "byte embeddings only");
  gc_cmd->add_option("--corrupt", gc.corrupt_tensor, "perturb one tensor's analytic gradient")->group("");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train, out, err);
    if (tag_cmd->parsed()) return cmd_tag(tag, in, out);
    if (eval_cmd->parsed()) return cmd_eval(eval, out, err);
    if (convert_cmd->parsed()) return cmd_convert(convert, in, out);
    if (gc_cmd->parsed()) {
      gc.use_crf = !no_crf;
      gc.use_bytes = !no_bytes;
      gc.use_words = !no_words;
      const GradCheckReport report = run_gradcheck(gc);
      write_gradcheck_report(out, report);
      return report.passed ? kExitOk : kExitDataError;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace seqlab
