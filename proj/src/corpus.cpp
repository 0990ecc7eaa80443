#include "seqlab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "seqlab/error.hpp"
#include "seqlab/eval.hpp"
#include "seqlab/tensor.hpp"

namespace seqlab {

LabelVocab::LabelVocab(const std::vector<std::string>& labels) {
  for (const auto& l : labels) add(l);
}

std::size_t LabelVocab::add(std::string_view label) {
  std::string key(label);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  const std::size_t idx = labels_.size();
  index_.emplace(key, idx);
  labels_.push_back(std::move(key));
  return idx;
}

std::optional<std::size_t> LabelVocab::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LabelVocab::index(std::string_view label) const {
  auto idx = find(label);
  if (!idx) throw Error("unknown label '" + std::string(label) + "'");
  return *idx;
}

SchemeKind parse_scheme(std::string_view name) {
  std::string upper(name);
  for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (upper == "IOB1") return SchemeKind::kIob1;
  if (upper == "IOB2" || upper == "BIO") return SchemeKind::kIob2;
  if (upper == "IOBES" || upper == "BIOES") return SchemeKind::kIobes;
  if (upper == "RAW" || upper == "NONE") return SchemeKind::kRaw;
  throw ConfigError("unknown tagging scheme '" + std::string(name) + "'");
}

std::string_view scheme_name(SchemeKind scheme) {
  switch (scheme) {
    case SchemeKind::kIob1: return "IOB1";
    case SchemeKind::kIob2: return "IOB2";
    case SchemeKind::kIobes: return "IOBES";
    case SchemeKind::kRaw: return "RAW";
  }
  return "?";
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

std::vector<std::string> Corpus::label_strings(std::size_t sentence) const {
  std::vector<std::string> out;
  const auto& tokens = sentences.at(sentence).tokens;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.label ? labels.label(*t.label) : std::string());
  return out;
}

namespace {

std::vector<std::string> split_columns(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t i = 0;
  const std::size_t n = line.size();
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; };
  while (i < n) {
    while (i < n && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < n && !is_space(line[j])) ++j;
    if (j > i) cols.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return cols;
}

std::size_t resolve_column(int column, std::size_t available, std::size_t line) {
  const long long idx = column < 0 ? static_cast<long long>(available) + column : column;
  if (idx < 0 || static_cast<std::size_t>(idx) >= available) {
    const std::size_t needed = column < 0 ? static_cast<std::size_t>(-column)
                                          : static_cast<std::size_t>(column) + 1;
    throw ParseError("expected at least " + std::to_string(needed) + " columns, found " +
                         std::to_string(available),
                     line);
  }
  return static_cast<std::size_t>(idx);
}

}  // namespace

std::vector<ConllBlock> read_conll_blocks(std::istream& in) {
  std::vector<ConllBlock> blocks;
  ConllBlock current;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto cols = split_columns(line);
    if (cols.empty()) {
      if (!current.rows.empty()) {
        blocks.push_back(std::move(current));
        current = {};
      }
      continue;
    }
    if (cols.front() == "-DOCSTART-") continue;
    current.rows.push_back(std::move(cols));
    current.lines.push_back(lineno);
  }
  if (!current.rows.empty()) blocks.push_back(std::move(current));
  return blocks;
}

Corpus parse_conll(std::istream& in, const ColumnSpec& columns) {
  Corpus corpus;
  for (auto& block : read_conll_blocks(in)) {
    Sentence sentence;
    sentence.tokens.reserve(block.rows.size());
    for (std::size_t r = 0; r < block.rows.size(); ++r) {
      const auto& cols = block.rows[r];
      const std::size_t line = block.lines[r];
      Token token;
      token.surface = cols[resolve_column(columns.token_column, cols.size(), line)];
      if (token.surface.find_first_of("\x01\x02") != std::string::npos)
        throw ParseError("token contains reserved control byte 0x01 or 0x02", line);
      if (columns.with_labels)
        token.label = corpus.labels.add(cols[resolve_column(columns.label_column, cols.size(), line)]);
      sentence.tokens.push_back(std::move(token));
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

Corpus parse_conll(std::istream& in, int token_column, int label_column) {
  return parse_conll(in, ColumnSpec{token_column, label_column, true});
}

void write_conll(std::ostream& out, const Corpus& corpus) {
  for (const auto& sentence : corpus.sentences) {
    for (const auto& token : sentence.tokens) {
      out << token.surface;
      if (token.label) out << ' ' << corpus.labels.label(*token.label);
      out << '\n';
    }
    out << '\n';
  }
}

void remap_labels(Corpus& corpus, LabelVocab& vocab) {
  std::vector<std::size_t> mapping(corpus.labels.size());
  for (std::size_t i = 0; i < mapping.size(); ++i) mapping[i] = vocab.add(corpus.labels.label(i));
  for (auto& sentence : corpus.sentences)
    for (auto& token : sentence.tokens)
      if (token.label) token.label = mapping[*token.label];
  corpus.labels = vocab;
}

namespace {

void validate_labels(const std::vector<std::string>& labels, SchemeKind scheme) {
  if (scheme == SchemeKind::kRaw) return;
  const std::string_view allowed = scheme == SchemeKind::kIobes ? "BIES" : "BI";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& l = labels[i];
    if (l == "O") continue;
    if (l.size() < 3 || l[1] != '-' || allowed.find(l[0]) == std::string_view::npos)
      throw ConversionError("malformed " + std::string(scheme_name(scheme)) + " label '" + l + "'", i);
  }
}

std::vector<std::string> render_spans(const std::vector<EntitySpan>& spans, std::size_t n,
                                      SchemeKind scheme) {
  std::vector<std::string> out(n, "O");
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto& sp = spans[k];
    for (std::size_t i = sp.start; i <= sp.end; ++i) {
      char prefix = 'I';
      switch (scheme) {
        case SchemeKind::kIob1: {
          const bool adjacent_same = k > 0 && spans[k - 1].end + 1 == sp.start &&
                                     spans[k - 1].type == sp.type;
          prefix = (i == sp.start && adjacent_same) ? 'B' : 'I';
          break;
        }
        case SchemeKind::kIob2:
          prefix = i == sp.start ? 'B' : 'I';
          break;
        case SchemeKind::kIobes:
          if (sp.start == sp.end) prefix = 'S';
          else if (i == sp.start) prefix = 'B';
          else if (i == sp.end) prefix = 'E';
          break;
        case SchemeKind::kRaw:
          break;
      }
      out[i] = std::string(1, prefix) + "-" + sp.type;
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> convert_scheme(const std::vector<std::string>& labels, SchemeKind from,
                                        SchemeKind to) {
  if (from == SchemeKind::kRaw || to == SchemeKind::kRaw) {
    if (from != to) throw ConfigError("RAW labels cannot be converted to or from a chunk scheme");
    return labels;
  }
  validate_labels(labels, from);
  return render_spans(extract_entities(labels, from), labels.size(), to);
}

Corpus convert_corpus(const Corpus& corpus, SchemeKind from, SchemeKind to) {
  Corpus out;
  out.sentences.reserve(corpus.sentences.size());
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const auto converted = convert_scheme(corpus.label_strings(s), from, to);
    Sentence sentence = corpus.sentences[s];
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i)
      if (sentence.tokens[i].label) sentence.tokens[i].label = out.labels.add(converted[i]);
    out.sentences.push_back(std::move(sentence));
  }
  return out;
}

std::size_t dev_split_size(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw SplitError("dev fraction must lie in (0, 1)");
  if (n < 2) throw SplitError("need at least 2 sentences to split, got " + std::to_string(n));
  auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

Split dev_split(const std::vector<Sentence>& sentences, double fraction, std::uint64_t seed) {
  const std::size_t n = sentences.size();
  const std::size_t k = dev_split_size(n, fraction);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  std::vector<char> in_dev(n, 0);
  for (std::size_t i = 0; i < k; ++i) in_dev[order[i]] = 1;
  Split split;
  split.dev.reserve(k);
  split.train.reserve(n - k);
  for (std::size_t i = 0; i < n; ++i) (in_dev[i] ? split.dev : split.train).push_back(sentences[i]);
  return split;
}

}  // namespace seqlab
