#include "seqlab/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "seqlab/error.hpp"

namespace seqlab {

CaseMode parse_case_mode(std::string_view name) {
  if (name == "cased") return CaseMode::kCased;
  if (name == "uncased") return CaseMode::kUncased;
  throw ConfigError("case mode must be 'cased' or 'uncased', got '" + std::string(name) + "'");
}

std::string_view case_mode_name(CaseMode mode) {
  return mode == CaseMode::kCased ? "cased" : "uncased";
}

namespace {

char32_t lower_codepoint(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c < 0xC0) return c;
  if (c <= 0xDE) return c == 0xD7 ? c : c + 32;
  if (c >= 0x100 && c <= 0x17F) {
    if (c == 0x130) return U'i';
    if (c == 0x178) return 0xFF;
    const bool even_upper = (c <= 0x12F) || (c >= 0x132 && c <= 0x137) || (c >= 0x14A && c <= 0x177);
    const bool odd_upper = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
    if (even_upper && c % 2 == 0) return c + 1;
    if (odd_upper && c % 2 == 1) return c + 1;
    return c;
  }
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 37;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 63;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  return c;
}

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

}  // namespace

std::string fold_case(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    if (b0 < 0x80) {
      out.push_back(static_cast<char>(lower_codepoint(b0)));
      ++i;
      continue;
    }
    // Only two-byte sequences can hold the mapped ranges.
    if ((b0 & 0xE0) == 0xC0 && i + 1 < text.size() &&
        (static_cast<unsigned char>(text[i + 1]) & 0xC0) == 0x80) {
      const char32_t cp = (static_cast<char32_t>(b0 & 0x1F) << 6) |
                          (static_cast<unsigned char>(text[i + 1]) & 0x3F);
      if (cp >= 0x80) {
        append_utf8(out, lower_codepoint(cp));
        i += 2;
        continue;
      }
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

bool EmbeddingTable::add(std::string_view token, std::span<const double> vector) {
  if (vector.size() != dim_)
    throw ShapeError("embedding vector has " + std::to_string(vector.size()) + " components, expected " +
                     std::to_string(dim_));
  std::string key = mode_ == CaseMode::kUncased ? fold_case(token) : std::string(token);
  if (index_.count(key)) return false;
  index_.emplace(key, tokens_.size());
  tokens_.push_back(std::move(key));
  matrix_.insert(matrix_.end(), vector.begin(), vector.end());
  return true;
}

std::size_t EmbeddingTable::lookup(std::string_view token) const {
  auto it = mode_ == CaseMode::kUncased ? index_.find(fold_case(token)) : index_.find(std::string(token));
  return it == index_.end() ? kUnknown : it->second;
}

std::uint64_t EmbeddingTable::vocabulary_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view bytes) {
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  };
  mix(std::to_string(dim_));
  mix("\n");
  mix(case_mode_name(mode_));
  mix("\n");
  for (const auto& t : tokens_) {
    mix(t);
    mix("\n");
  }
  return h;
}

EmbeddingTable load_text_embeddings(std::istream& in, CaseMode mode,
                                    std::optional<std::size_t> expected_dim) {
  std::optional<EmbeddingTable> table;
  if (expected_dim) table.emplace(*expected_dim, mode);
  std::string line;
  std::size_t lineno = 0;
  Vec values;
  while (std::getline(in, line)) {
    ++lineno;
    const char* p = line.data();
    const char* end = p + line.size();
    auto skip_space = [&] {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    };
    skip_space();
    if (p == end) continue;
    const char* tok_begin = p;
    while (p < end && *p != ' ' && *p != '\t' && *p != '\r') ++p;
    const std::string_view token(tok_begin, static_cast<std::size_t>(p - tok_begin));
    values.clear();
    for (skip_space(); p < end; skip_space()) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' && *next != '\r'))
        throw LoadError(LoadErrorKind::kNonNumeric,
                        "embeddings line " + std::to_string(lineno) + ": non-numeric field");
      values.push_back(v);
      p = next;
    }
    if (!table) {
      if (values.empty())
        throw LoadError(LoadErrorKind::kDimensionMismatch,
                        "embeddings line " + std::to_string(lineno) + ": no vector components");
      table.emplace(values.size(), mode);
    }
    if (values.size() != table->dim())
      throw LoadError(LoadErrorKind::kDimensionMismatch,
                      "embeddings line " + std::to_string(lineno) + ": expected " +
                          std::to_string(table->dim()) + " components, found " +
                          std::to_string(values.size()));
    table->add(token, values);
  }
  if (!table) return EmbeddingTable(0, mode);
  return std::move(*table);
}

EmbeddingTable load_text_embeddings(const std::string& path, CaseMode mode,
                                    std::optional<std::size_t> expected_dim) {
  std::ifstream in(path);
  if (!in) throw LoadError(LoadErrorKind::kIo, "cannot open embeddings file " + path);
  return load_text_embeddings(in, mode, expected_dim);
}

ByteSequence word_to_bytes(std::string_view token) {
  ByteSequence out;
  out.reserve(token.size() + 2);
  out.push_back(kWordStartByte);
  for (char c : token) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(kWordEndByte);
  return out;
}

std::vector<Vec> project_bytes(const Param& projection, const ByteSequence& bytes) {
  if (projection.cols() != 256) throw ShapeError("byte projection matrix must have 256 columns");
  const std::size_t d = projection.rows();
  std::vector<Vec> out(bytes.size(), Vec(d));
  for (std::size_t j = 0; j < bytes.size(); ++j)
    for (std::size_t r = 0; r < d; ++r) out[j][r] = projection.value(r, bytes[j]);
  return out;
}

void project_bytes_backward(Param& projection, const ByteSequence& bytes,
                            const std::vector<Vec>& grads) {
  const std::size_t d = projection.rows();
  for (std::size_t j = 0; j < bytes.size(); ++j)
    for (std::size_t r = 0; r < d; ++r) projection.grad(r, bytes[j]) += grads[j][r];
}

}  // namespace seqlab
