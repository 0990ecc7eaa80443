#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace seqlab {

struct Token {
  std::string surface;
  std::optional<std::size_t> label;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
};

// Label string <-> index, in first-seen order.
class LabelVocab {
 public:
  LabelVocab() = default;
  explicit LabelVocab(const std::vector<std::string>& labels);

  std::size_t add(std::string_view label);
  std::optional<std::size_t> find(std::string_view label) const;
  std::size_t index(std::string_view label) const;  // throws if absent
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }

  friend bool operator==(const LabelVocab& a, const LabelVocab& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class SchemeKind { kIob1, kIob2, kIobes, kRaw };

SchemeKind parse_scheme(std::string_view name);
std::string_view scheme_name(SchemeKind scheme);

struct Corpus {
  std::vector<Sentence> sentences;
  LabelVocab labels;

  std::size_t token_count() const;
  std::vector<std::string> label_strings(std::size_t sentence) const;
};

// Column selection for CoNLL files. Negative indices count from the end of
// each line (-1 is the last column).
struct ColumnSpec {
  int token_column = 0;
  int label_column = 1;
  bool with_labels = true;
};

// Raw whitespace-split rows of one blank-line-delimited block, with the
// 1-based line number of every row.
struct ConllBlock {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
};

std::vector<ConllBlock> read_conll_blocks(std::istream& in);

Corpus parse_conll(std::istream& in, const ColumnSpec& columns = {});
Corpus parse_conll(std::istream& in, int token_column, int label_column);
void write_conll(std::ostream& out, const Corpus& corpus);

// Rewrites every label of `corpus` into `vocab`, adding missing labels.
void remap_labels(Corpus& corpus, LabelVocab& vocab);

std::vector<std::string> convert_scheme(const std::vector<std::string>& labels, SchemeKind from,
                                        SchemeKind to);
Corpus convert_corpus(const Corpus& corpus, SchemeKind from, SchemeKind to);

struct Split {
  std::vector<Sentence> train;
  std::vector<Sentence> dev;
};

// Seeded random split; dev receives round-half-up(fraction * N) sentences,
// clamped so that neither side is empty. Relative order is preserved.
Split dev_split(const std::vector<Sentence>& sentences, double fraction, std::uint64_t seed);
std::size_t dev_split_size(std::size_t n, double fraction);

}  // namespace seqlab
