#include "seqlab/batch.hpp"

#include <unordered_map>

#include "seqlab/error.hpp"

namespace seqlab {

namespace {

constexpr std::uint64_t kByteSite = 1;
constexpr std::uint64_t kWordSite = 2;

}  // namespace

BatchGraph::BatchGraph(const Model& model, const EmbeddingTable* table,
                       std::span<const Sentence> batch, const BatchOptions& options)
    : model_(model), training_(options.mode == Mode::kTrain) {
  const TrainConfig& cfg = model.config;
  if (batch.empty()) throw ShapeError("empty batch");
  if (cfg.use_words) {
    if (!table) throw ConfigError("model uses word embeddings but no embedding table was given");
    if (table->dim() != model.embedding.dim)
      throw ShapeError("embedding table dimension " + std::to_string(table->dim()) +
                       " does not match the model's " + std::to_string(model.embedding.dim));
  }
  const double rate = cfg.dropout_rate;
  const bool drop = training_ && rate > 0.0;

  // Unique surface forms in first-seen order; they key the byte-level masks.
  std::unordered_map<std::string, std::size_t> unique;
  std::unordered_map<std::string, std::size_t> slot_of;
  sentences_.resize(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto& tokens = batch[s].tokens;
    if (tokens.empty()) throw ShapeError("empty sentence in batch");
    auto& state = sentences_[s];
    state.slot.resize(tokens.size());
    state.word_index.resize(tokens.size(), EmbeddingTable::kUnknown);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      const std::string& w = tokens[t].surface;
      if (cfg.use_words) state.word_index[t] = table->lookup(w);
      if (!cfg.use_bytes) continue;
      const std::size_t uid = unique.emplace(w, unique.size()).first->second;
      if (options.dedup) {
        auto [it, fresh] = slot_of.emplace(w, slots_.size());
        state.slot[t] = it->second;
        if (!fresh) continue;
      } else {
        state.slot[t] = slots_.size();
      }
      ByteSlot slot;
      slot.bytes = word_to_bytes(w);
      auto projections = project_bytes(model.byte_projection, slot.bytes);
      if (drop) {
        auto rng = RngStream::derive({options.key.seed, options.key.epoch, options.key.batch, kByteSite, uid});
        for (auto& p : projections) {
          slot.projection_masks.push_back(dropout_mask(p.size(), rate, rng));
          apply_mask(p, slot.projection_masks.back());
        }
        slot.trace = byte_embed_trace(model.byte_lstm, projections);
        slot.embedding_mask = dropout_mask(slot.trace.embedding.size(), rate, rng);
        slot.embedding = slot.trace.embedding;
        apply_mask(slot.embedding, slot.embedding_mask);
      } else {
        slot.trace = byte_embed_trace(model.byte_lstm, projections);
        slot.embedding = slot.trace.embedding;
      }
      slots_.push_back(std::move(slot));
    }
  }

  scores_.resize(batch.size());
  const std::size_t L = model.label_count();
  for (std::size_t s = 0; s < batch.size(); ++s) {
    auto& state = sentences_[s];
    const std::size_t n = batch[s].tokens.size();
    RngStream rng = RngStream::derive({options.key.seed, options.key.epoch, options.key.batch, kWordSite, s});
    std::vector<Vec> joint(n);
    for (std::size_t t = 0; t < n; ++t) {
      Vec we;
      if (cfg.use_words) {
        const std::size_t idx = state.word_index[t];
        if (idx == EmbeddingTable::kUnknown) we = model.unknown_word.value.data();
        else we.assign(table->vector(idx).begin(), table->vector(idx).end());
        if (drop) {
          state.word_masks.push_back(dropout_mask(we.size(), rate, rng));
          apply_mask(we, state.word_masks.back());
        }
      }
      if (cfg.use_bytes) joint[t] = joint_embed(slots_[state.slot[t]].embedding, we);
      else joint[t] = std::move(we);
    }
    state.lstm = bilstm_trace(model.word_lstm, joint);
    state.outputs = state.lstm.outputs;
    Matrix& sc = scores_[s];
    sc = Matrix(n, L);
    for (std::size_t t = 0; t < n; ++t) {
      if (drop) {
        state.output_masks.push_back(dropout_mask(state.outputs[t].size(), rate, rng));
        apply_mask(state.outputs[t], state.output_masks.back());
      }
      const Vec y = linear_forward(model.output, state.outputs[t]);
      std::copy(y.begin(), y.end(), sc.row(t).begin());
    }
  }
}

void BatchGraph::backward(Model& model, const std::vector<Matrix>& d_scores) const {
  if (&model != &model_) throw Error("BatchGraph::backward called with a different model");
  if (d_scores.size() != sentences_.size()) throw ShapeError("score gradient count mismatch");
  const TrainConfig& cfg = model.config;
  const std::size_t byte_size = model.byte_embedding_size();
  std::vector<Vec> d_embedding(slots_.size(), Vec(byte_size, 0.0));

  for (std::size_t s = 0; s < sentences_.size(); ++s) {
    const auto& state = sentences_[s];
    const std::size_t n = state.outputs.size();
    std::vector<Vec> d_outputs(n);
    for (std::size_t t = 0; t < n; ++t) {
      d_outputs[t] = linear_backward(model.output, state.outputs[t], d_scores[s].row(t));
      if (!state.output_masks.empty()) apply_mask(d_outputs[t], state.output_masks[t]);
    }
    const auto d_joint = bilstm_backward(model.word_lstm, state.lstm, d_outputs);
    for (std::size_t t = 0; t < n; ++t) {
      const Vec& dj = d_joint[t];
      if (cfg.use_bytes) {
        Vec& acc = d_embedding[state.slot[t]];
        for (std::size_t k = 0; k < byte_size; ++k) acc[k] += dj[k];
      }
      if (cfg.use_words && state.word_index[t] == EmbeddingTable::kUnknown) {
        // Frozen rows get no gradient; only misses reach the unknown vector.
        const Vec* mask = state.word_masks.empty() ? nullptr : &state.word_masks[t];
        for (std::size_t k = 0; k < model.embedding.dim; ++k)
          model.unknown_word.grad(k, 0) += dj[byte_size + k] * (mask ? (*mask)[k] : 1.0);
      }
    }
  }

  for (std::size_t u = 0; u < slots_.size(); ++u) {
    const ByteSlot& slot = slots_[u];
    Vec& de = d_embedding[u];
    if (!slot.embedding_mask.empty()) apply_mask(de, slot.embedding_mask);
    auto d_proj = byte_embed_backward(model.byte_lstm, slot.trace, de);
    if (!slot.projection_masks.empty())
      for (std::size_t j = 0; j < d_proj.size(); ++j) apply_mask(d_proj[j], slot.projection_masks[j]);
    project_bytes_backward(model.byte_projection, slot.bytes, d_proj);
  }
}

std::vector<Matrix> batch_forward(const Model& model, const EmbeddingTable* table,
                                  std::span<const Sentence> batch, Mode mode, bool dedup) {
  BatchOptions options;
  options.mode = mode;
  options.dedup = dedup;
  return BatchGraph(model, table, batch, options).scores();
}

LabelSeq gold_labels(const Sentence& sentence) {
  LabelSeq y;
  y.reserve(sentence.tokens.size());
  for (const auto& t : sentence.tokens) {
    if (!t.label) throw TrainingError("sentence token '" + t.surface + "' has no gold label");
    y.push_back(*t.label);
  }
  return y;
}

BatchLoss batch_loss(const Model& model, std::span<const Sentence> batch,
                     const std::vector<Matrix>& scores) {
  BatchLoss out;
  const double scale = 1.0 / static_cast<double>(batch.size());
  const std::size_t L = model.label_count();
  if (model.config.use_crf) out.d_transitions = Matrix(L, L, 0.0);
  out.d_scores.reserve(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const LabelSeq y = gold_labels(batch[s]);
    NllResult r = model.config.use_crf ? crf_nll(scores[s], model.transitions.value, y)
                                       : softmax_nll(scores[s], y);
    out.loss += r.loss * scale;
    for (auto& v : r.d_scores.data()) v *= scale;
    out.d_scores.push_back(std::move(r.d_scores));
    if (model.config.use_crf)
      for (std::size_t k = 0; k < r.d_transitions.size(); ++k)
        out.d_transitions.data()[k] += r.d_transitions.data()[k] * scale;
  }
  return out;
}

double accumulate_gradients(Model& model, const EmbeddingTable* table,
                            std::span<const Sentence> batch, const BatchOptions& options) {
  BatchGraph graph(model, table, batch, options);
  BatchLoss loss = batch_loss(model, batch, graph.scores());
  graph.backward(model, loss.d_scores);
  if (model.config.use_crf)
    for (std::size_t k = 0; k < loss.d_transitions.size(); ++k)
      model.transitions.grad.data()[k] += loss.d_transitions.data()[k];
  return loss.loss;
}

LabelSeq decode(const Model& model, const Matrix& scores, const TransitionMask* mask) {
  if (!model.config.use_crf) return softmax_decode(scores).labels;
  return mask ? viterbi(scores, model.transitions.value, *mask).labels
              : viterbi(scores, model.transitions.value).labels;
}

std::vector<LabelSeq> predict(const Model& model, const EmbeddingTable* table,
                              std::span<const Sentence> sentences, std::size_t batch_size,
                              bool constrained) {
  std::vector<LabelSeq> out;
  out.reserve(sentences.size());
  TransitionMask mask;
  if (constrained) mask = iobes_transition_mask(model.labels);
  batch_size = std::max<std::size_t>(batch_size, 1);
  for (std::size_t begin = 0; begin < sentences.size(); begin += batch_size) {
    const std::size_t len = std::min(batch_size, sentences.size() - begin);
    const auto scores = batch_forward(model, table, sentences.subspan(begin, len), Mode::kInfer);
    for (const auto& s : scores) out.push_back(decode(model, s, constrained ? &mask : nullptr));
  }
  return out;
}

}  // namespace seqlab
