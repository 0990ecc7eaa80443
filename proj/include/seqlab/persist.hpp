#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "seqlab/embeddings.hpp"
#include "seqlab/model.hpp"

namespace seqlab {

// Model file layout, all integers and floats little-endian:
//   8-byte magic "SEQLABM\0", u32 format version,
//   u64 metadata length + UTF-8 `key = value` lines (config, embedding
//   info, labels in index order),
//   u32 record count, then per record: u32 name length, name bytes,
//   u32 rank, u64 dims[rank], f64 values (row-major).
// Word vectors are not stored; the vocabulary hash ties the file to the
// embedding table it was trained with.
inline constexpr char kModelMagic[8] = {'S', 'E', 'Q', 'L', 'A', 'B', 'M', '\0'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const Model& model, std::ostream& out);
void save_model(const Model& model, const std::string& path);

struct ModelHeader {
  TrainConfig config;
  EmbeddingInfo embedding;
  LabelVocab labels;
};

// Reads magic, version and metadata only.
ModelHeader read_model_header(std::istream& in);
ModelHeader read_model_header(const std::string& path);

// `table` may be null only for models without word embeddings.
Model load_model(std::istream& in, const EmbeddingTable* table);
Model load_model(const std::string& path, const EmbeddingTable* table);

}  // namespace seqlab
