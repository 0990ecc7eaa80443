#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seqlab/corpus.hpp"
#include "seqlab/crf.hpp"
#include "seqlab/embeddings.hpp"
#include "seqlab/model.hpp"

namespace seqlab {

enum class Mode { kTrain, kInfer };

// Dropout masks are drawn from streams keyed by (seed, epoch, batch, ...).
// Byte-level masks (projections, byte embedding) are keyed by the index of
// the word's surface form among the batch's unique words, so the dedup and
// naive paths replay identical masks. Word-level masks (word vector, word
// Bi-LSTM outputs) are keyed by the sentence index within the batch.
struct DropoutKey {
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  std::uint64_t batch = 0;
};

struct BatchOptions {
  Mode mode = Mode::kInfer;
  bool dedup = true;
  DropoutKey key;
};

// Forward computation over a batch of sentences, keeping everything the
// backward pass needs. With dedup on, each unique surface form is pushed
// through the byte Bi-LSTM once and its embedding is scattered to every
// occurrence; its gradient is summed over occurrences before one backward
// pass.
class BatchGraph {
 public:
  BatchGraph(const Model& model, const EmbeddingTable* table, std::span<const Sentence> batch,
             const BatchOptions& options = {});

  const std::vector<Matrix>& scores() const { return scores_; }
  std::size_t byte_embedding_computations() const { return slots_.size(); }

  // Accumulates parameter gradients into `model`, which must be the model
  // the graph was built from.
  void backward(Model& model, const std::vector<Matrix>& d_scores) const;

 private:
  struct ByteSlot {
    ByteSequence bytes;
    std::vector<Vec> projection_masks;
    Vec embedding_mask;
    ByteEmbedTrace trace;
    Vec embedding;  // after dropout
  };
  struct SentenceState {
    std::vector<std::size_t> slot;        // per position
    std::vector<std::size_t> word_index;  // per position, or kUnknown
    std::vector<Vec> word_masks;
    std::vector<Vec> output_masks;
    BiLstmTrace lstm;
    std::vector<Vec> outputs;  // word Bi-LSTM outputs after dropout
  };

  const Model& model_;
  bool training_;
  std::vector<ByteSlot> slots_;
  std::vector<SentenceState> sentences_;
  std::vector<Matrix> scores_;
};

std::vector<Matrix> batch_forward(const Model& model, const EmbeddingTable* table,
                                  std::span<const Sentence> batch, Mode mode = Mode::kInfer,
                                  bool dedup = true);

LabelSeq gold_labels(const Sentence& sentence);

struct BatchLoss {
  double loss = 0.0;  // mean over sentences of the per-sentence loss
  std::vector<Matrix> d_scores;
  Matrix d_transitions;
};

// CRF negative log-likelihood, or per-token softmax cross-entropy when the
// model has no CRF.
BatchLoss batch_loss(const Model& model, std::span<const Sentence> batch,
                     const std::vector<Matrix>& scores);

// Forward, loss and backward for one batch. Gradients are accumulated into
// the model (callers zero them first). Returns the batch loss.
double accumulate_gradients(Model& model, const EmbeddingTable* table,
                            std::span<const Sentence> batch, const BatchOptions& options);

LabelSeq decode(const Model& model, const Matrix& scores, const TransitionMask* mask = nullptr);

// Inference over a corpus in chunks of `batch_size` sentences.
std::vector<LabelSeq> predict(const Model& model, const EmbeddingTable* table,
                              std::span<const Sentence> sentences, std::size_t batch_size = 64,
                              bool constrained = false);

}  // namespace seqlab
