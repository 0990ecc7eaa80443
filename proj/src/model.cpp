#include "seqlab/model.hpp"

#include "seqlab/error.hpp"

namespace seqlab {

EmbeddingInfo EmbeddingInfo::of(const EmbeddingTable& table) {
  return {table.dim(), table.size(), table.case_mode(), table.vocabulary_hash()};
}

Model::Model(const TrainConfig& cfg, LabelVocab label_vocab, EmbeddingInfo info)
    : config(cfg), labels(std::move(label_vocab)), embedding(info) {
  config.validate();
  if (labels.empty()) throw ConfigError("model needs at least one label");
  if (config.use_words && embedding.dim == 0)
    throw ConfigError("word embeddings enabled but embedding dimension is 0");
  if (!config.use_words) embedding = EmbeddingInfo{};
  const std::size_t L = labels.size();
  if (config.use_bytes) {
    byte_projection = Param("byte_projection", config.byte_dim, 256);
    byte_lstm = BiLstmParams("byte_lstm", config.byte_hidden, config.byte_dim);
  }
  if (config.use_words) unknown_word = Param("unknown_word", embedding.dim, 1);
  word_lstm = BiLstmParams("word_lstm", config.word_hidden, joint_size());
  output = LinearParams("output", L, 2 * config.word_hidden);
  if (config.use_crf) transitions = Param("transitions", L, L);
}

void Model::init(RngStream& rng) {
  if (config.use_bytes) {
    init_param(byte_projection, rng, InitKind::kWeight);
    byte_lstm.init(rng);
  }
  if (config.use_words) init_param(unknown_word, rng, InitKind::kWeight);
  word_lstm.init(rng);
  output.init(rng);
  if (config.use_crf) init_param(transitions, rng, InitKind::kWeight);
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out;
  if (config.use_bytes) {
    out.push_back(&byte_projection);
    for (Param* p : byte_lstm.params()) out.push_back(p);
  }
  if (config.use_words) out.push_back(&unknown_word);
  for (Param* p : word_lstm.params()) out.push_back(p);
  for (Param* p : output.params()) out.push_back(p);
  if (config.use_crf) out.push_back(&transitions);
  return out;
}

std::vector<const Param*> Model::params() const {
  std::vector<const Param*> out;
  for (Param* p : const_cast<Model*>(this)->params()) out.push_back(p);
  return out;
}

void Model::zero_grad() {
  for (Param* p : params()) p->zero_grad();
}

}  // namespace seqlab
