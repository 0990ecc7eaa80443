#include "seqlab/persist.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "seqlab/error.hpp"

namespace seqlab {

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes, sizeof(T));
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T le(const std::string& context) {
    unsigned char bytes[sizeof(T)];
    read(bytes, sizeof(T), context);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes[i]) << (8 * i);
    return v;
  }

  double f64(const std::string& context) { return std::bit_cast<double>(le<std::uint64_t>(context)); }

  std::string bytes(std::size_t n, const std::string& context) {
    std::string s(n, '\0');
    read(s.data(), n, context);
    return s;
  }

  void read(void* dst, std::size_t n, const std::string& context) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw LoadError(LoadErrorKind::kTruncated, context);
  }

 private:
  std::istream& in_;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  auto [ptr, ec] = std::to_chars(buf, buf + 16, v, 16);
  return std::string(buf, ptr);
}

}  // namespace

void save_model(const Model& model, std::ostream& out) {
  std::ostringstream meta;
  write_config(meta, model.config);
  meta << "embedding.dim = " << model.embedding.dim << '\n'
       << "embedding.vocab_size = " << model.embedding.vocab_size << '\n'
       << "embedding.case_mode = " << case_mode_name(model.embedding.case_mode) << '\n'
       << "embedding.vocab_hash = " << hex64(model.embedding.vocab_hash) << '\n';
  for (const auto& l : model.labels.labels()) meta << "label = " << l << '\n';
  const std::string meta_text = meta.str();

  out.write(kModelMagic, sizeof kModelMagic);
  put_le<std::uint32_t>(out, kModelFormatVersion);
  put_le<std::uint64_t>(out, meta_text.size());
  out.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));

  const auto params = model.params();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Param* p : params) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put_le<std::uint32_t>(out, 2);
    put_le<std::uint64_t>(out, p->rows());
    put_le<std::uint64_t>(out, p->cols());
    for (double v : p->value.data()) put_f64(out, v);
  }
  if (!out) throw Error("failed to write model");
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  save_model(model, out);
}

ModelHeader read_model_header(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.read(magic, sizeof magic, "truncated header");
  if (std::memcmp(magic, kModelMagic, sizeof magic) != 0)
    throw LoadError(LoadErrorKind::kBadMagic, "not a model file (bad magic)");
  const auto version = r.le<std::uint32_t>("truncated header");
  if (version != kModelFormatVersion)
    throw LoadError(LoadErrorKind::kVersionMismatch,
                    "unsupported model format version " + std::to_string(version) + " (expected " +
                        std::to_string(kModelFormatVersion) + ")");
  const auto meta_size = r.le<std::uint64_t>("truncated metadata");
  if (meta_size > (std::uint64_t{1} << 32)) throw LoadError(LoadErrorKind::kMalformed, "metadata too large");
  const std::string meta_text = r.bytes(static_cast<std::size_t>(meta_size), "truncated metadata");

  ModelHeader header;
  std::istringstream meta(meta_text);
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw LoadError(LoadErrorKind::kMalformed, "malformed metadata line: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    try {
      if (key == "label") {
        header.labels.add(value);
      } else if (key == "embedding.dim") {
        header.embedding.dim = std::stoull(value);
      } else if (key == "embedding.vocab_size") {
        header.embedding.vocab_size = std::stoull(value);
      } else if (key == "embedding.case_mode") {
        header.embedding.case_mode = parse_case_mode(value);
      } else if (key == "embedding.vocab_hash") {
        header.embedding.vocab_hash = std::stoull(value, nullptr, 16);
      } else {
        set_config_value(header.config, key, value);
      }
    } catch (const std::exception& e) {
      throw LoadError(LoadErrorKind::kMalformed, "bad metadata '" + line + "': " + e.what());
    }
  }
  return header;
}

ModelHeader read_model_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(LoadErrorKind::kIo, "cannot open model file " + path);
  return read_model_header(in);
}

Model load_model(std::istream& in, const EmbeddingTable* table) {
  ModelHeader header = read_model_header(in);
  Reader r(in);
  const TrainConfig& config = header.config;
  const EmbeddingInfo& info = header.embedding;

  if (config.use_words) {
    if (!table) throw LoadError(LoadErrorKind::kVocabularyMismatch, "model needs word embeddings; none given");
    if (table->vocabulary_hash() != info.vocab_hash || table->dim() != info.dim ||
        table->case_mode() != info.case_mode)
      throw LoadError(LoadErrorKind::kVocabularyMismatch,
                      "embedding vocabulary hash mismatch: model expects " + hex64(info.vocab_hash) +
                          ", table has " + hex64(table->vocabulary_hash()));
  }

  Model model;
  try {
    model = Model(config, header.labels, info);
  } catch (const Error& e) {
    throw LoadError(LoadErrorKind::kMalformed, std::string("inconsistent metadata: ") + e.what());
  }

  std::map<std::string, Param*> by_name;
  for (Param* p : model.params()) by_name[p->name] = p;
  const auto count = r.le<std::uint32_t>("truncated record table");
  if (count != by_name.size())
    throw LoadError(LoadErrorKind::kMalformed, "expected " + std::to_string(by_name.size()) +
                                                   " parameter records, found " + std::to_string(count));
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name_len = r.le<std::uint32_t>("truncated record #" + std::to_string(k));
    if (name_len > 4096) throw LoadError(LoadErrorKind::kMalformed, "record name too long");
    const std::string name = r.bytes(name_len, "truncated record #" + std::to_string(k));
    const std::string context = "truncated record " + name;
    auto it = by_name.find(name);
    if (it == by_name.end()) throw LoadError(LoadErrorKind::kMalformed, "unexpected record " + name);
    Param& p = *it->second;
    const auto rank = r.le<std::uint32_t>(context);
    if (rank != 2) throw LoadError(LoadErrorKind::kMalformed, "record " + name + " has rank " + std::to_string(rank));
    const auto rows = r.le<std::uint64_t>(context);
    const auto cols = r.le<std::uint64_t>(context);
    if (rows != p.rows() || cols != p.cols())
      throw LoadError(LoadErrorKind::kMalformed, "record " + name + " has shape " + std::to_string(rows) + "x" +
                                                     std::to_string(cols) + ", expected " +
                                                     std::to_string(p.rows()) + "x" + std::to_string(p.cols()));
    for (auto& v : p.value.data()) v = r.f64(context);
    by_name.erase(it);
  }
  return model;
}

Model load_model(const std::string& path, const EmbeddingTable* table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(LoadErrorKind::kIo, "cannot open model file " + path);
  return load_model(in, table);
}

}  // namespace seqlab
