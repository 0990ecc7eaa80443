#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "seqlab/config.hpp"
#include "seqlab/corpus.hpp"
#include "seqlab/embeddings.hpp"
#include "seqlab/nn.hpp"
#include "seqlab/tensor.hpp"

namespace seqlab {

// What the model needs to know about the frozen word vectors. The vectors
// themselves are never stored with the model.
struct EmbeddingInfo {
  std::size_t dim = 0;
  std::size_t vocab_size = 0;
  CaseMode case_mode = CaseMode::kCased;
  std::uint64_t vocab_hash = 0;

  static EmbeddingInfo of(const EmbeddingTable& table);
  friend bool operator==(const EmbeddingInfo&, const EmbeddingInfo&) = default;
};

// Byte projection -> byte Bi-LSTM -> (+ word vector) -> word Bi-LSTM ->
// linear scores -> CRF. Components disabled by the config have no tensors.
struct Model {
  TrainConfig config;
  LabelVocab labels;
  EmbeddingInfo embedding;

  Param byte_projection;  // d_b x 256
  BiLstmParams byte_lstm;
  Param unknown_word;     // d_e x 1, the only trainable word vector
  BiLstmParams word_lstm;
  LinearParams output;
  Param transitions;      // L x L

  Model() = default;
  // Allocates every enabled tensor with zero values.
  Model(const TrainConfig& config, LabelVocab labels, EmbeddingInfo embedding);

  void init(RngStream& rng);

  std::size_t byte_embedding_size() const { return config.use_bytes ? 2 * config.byte_hidden : 0; }
  std::size_t word_embedding_size() const { return config.use_words ? embedding.dim : 0; }
  std::size_t joint_size() const { return byte_embedding_size() + word_embedding_size(); }
  std::size_t label_count() const { return labels.size(); }

  std::vector<Param*> params();
  std::vector<const Param*> params() const;
  void zero_grad();
};

}  // namespace seqlab
