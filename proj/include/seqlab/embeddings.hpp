#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqlab/tensor.hpp"

namespace seqlab {

enum class CaseMode { kCased, kUncased };

CaseMode parse_case_mode(std::string_view name);
std::string_view case_mode_name(CaseMode mode);

// Simple lowercase mapping over UTF-8 text: ASCII, Latin-1, Latin
// Extended-A, Greek and Cyrillic capitals. Other bytes pass through.
std::string fold_case(std::string_view text);

// Frozen pre-trained word vectors. Row k of the matrix is the vector of
// token(k). The trainable "unknown" vector lives with the model parameters.
class EmbeddingTable {
 public:
  static constexpr std::size_t kUnknown = std::numeric_limits<std::size_t>::max();

  EmbeddingTable() = default;
  EmbeddingTable(std::size_t dim, CaseMode mode) : dim_(dim), mode_(mode) {}

  // Returns false (and keeps the first vector) when the key already exists.
  bool add(std::string_view token, std::span<const double> vector);

  std::size_t lookup(std::string_view token) const;
  std::span<const double> vector(std::size_t index) const {
    return {matrix_.data() + index * dim_, dim_};
  }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  CaseMode case_mode() const { return mode_; }

  // FNV-1a over dimension, case mode and the ordered token list.
  std::uint64_t vocabulary_hash() const;

 private:
  std::size_t dim_ = 0;
  CaseMode mode_ = CaseMode::kCased;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> matrix_;
};

// One token followed by `dim` decimal numbers per line. The dimension comes
// from the first line unless `expected_dim` is given.
EmbeddingTable load_text_embeddings(std::istream& in, CaseMode mode,
                                    std::optional<std::size_t> expected_dim = std::nullopt);
EmbeddingTable load_text_embeddings(const std::string& path, CaseMode mode,
                                    std::optional<std::size_t> expected_dim = std::nullopt);

constexpr std::uint8_t kWordStartByte = 0x01;
constexpr std::uint8_t kWordEndByte = 0x02;

using ByteSequence = std::vector<std::uint8_t>;

// [0x01] + utf8(token) + [0x02]
ByteSequence word_to_bytes(std::string_view token);

// Column selection from the d_b x 256 byte projection matrix.
std::vector<Vec> project_bytes(const Param& projection, const ByteSequence& bytes);
// Scatters d(projection_j) into the gradient column of byte j.
void project_bytes_backward(Param& projection, const ByteSequence& bytes,
                            const std::vector<Vec>& grads);

}  // namespace seqlab
