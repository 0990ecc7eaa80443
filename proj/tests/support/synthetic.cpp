#include "synthetic.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <set>

namespace seqlab::testing {

namespace {

std::string random_letters(RngStream& rng, std::size_t len) {
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + rng.below(26)));
  return s;
}

}  // namespace

Corpus memorization_corpus(std::size_t sentences, std::size_t vocab, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<std::string> words;
  std::set<std::string> seen;
  while (words.size() < vocab) {
    std::string w = random_letters(rng, 2 + rng.below(5));
    if (seen.insert(w).second) words.push_back(w);
  }
  const std::size_t entity_words = vocab / 3;  // words [0, entity_words) are entities
  Corpus corpus;
  for (const char* l : {"O", "B-ENT", "I-ENT", "E-ENT", "S-ENT"}) corpus.labels.add(l);
  for (std::size_t s = 0; s < sentences; ++s) {
    const std::size_t n = 3 + rng.below(8);
    std::vector<std::size_t> ids(n);
    for (auto& id : ids) id = rng.below(vocab);
    Sentence sentence;
    for (std::size_t t = 0; t < n; ++t) {
      const bool ent = ids[t] < entity_words;
      const bool prev = t > 0 && ids[t - 1] < entity_words;
      const bool next = t + 1 < n && ids[t + 1] < entity_words;
      std::string label = "O";
      if (ent) label = !prev && !next ? "S-ENT" : !prev ? "B-ENT" : !next ? "E-ENT" : "I-ENT";
      sentence.tokens.push_back({words[ids[t]], corpus.labels.index(label)});
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

Corpus shape_cued_corpus(std::size_t sentences, std::uint64_t seed, int stem_pool) {
  RngStream rng = RngStream::derive({seed, static_cast<std::uint64_t>(stem_pool)});
  struct Type {
    const char* name;
    std::vector<std::string> suffixes;
  };
  const std::vector<Type> types = {{"LOC", {"burg", "ville"}}, {"PER", {"son", "ski"}}};
  const std::vector<std::string> plain_suffixes = {"ed", "ing", "ly", "ous"};
  // Stems share one letter distribution; a hash of the stem picks its pool,
  // which keeps the pools' surface forms disjoint.
  auto stem = [&] {
    for (;;) {
      std::string s = random_letters(rng, 3 + rng.below(3));
      std::uint64_t h = 0;
      for (char ch : s) h = h * 31 + static_cast<unsigned char>(ch);
      if (static_cast<int>(h % kStemPools) == stem_pool) return s;
    }
  };
  Corpus corpus;
  corpus.labels.add("O");
  for (std::size_t s = 0; s < sentences; ++s) {
    Sentence sentence;
    const std::size_t n = 4 + rng.below(7);
    bool prev_entity = false;
    while (sentence.tokens.size() < n) {
      if (!prev_entity && rng.uniform() < 0.3) {
        const Type& type = types[rng.below(types.size())];
        const std::size_t len = 1 + rng.below(2);
        for (std::size_t k = 0; k < len; ++k) {
          std::string w = stem();
          w[0] = static_cast<char>(w[0] - 'a' + 'A');
          w += type.suffixes[rng.below(type.suffixes.size())];
          std::string label = len == 1 ? "S-" : k == 0 ? "B-" : "E-";
          label += type.name;
          sentence.tokens.push_back({w, corpus.labels.add(label)});
        }
        prev_entity = true;
      } else {
        std::string w = stem() + plain_suffixes[rng.below(plain_suffixes.size())];
        sentence.tokens.push_back({w, corpus.labels.add("O")});
        prev_entity = false;
      }
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

EmbeddingTable random_embeddings(const Corpus& corpus, std::size_t dim, std::uint64_t seed) {
  RngStream rng(seed);
  EmbeddingTable table(dim, CaseMode::kCased);
  Vec v(dim);
  for (const auto& s : corpus.sentences)
    for (const auto& t : s.tokens) {
      if (table.lookup(t.surface) != EmbeddingTable::kUnknown) continue;
      for (auto& x : v) x = rng.uniform(-1.0, 1.0);
      table.add(t.surface, v);
    }
  return table;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, RngStream& rng, double scale) {
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = rng.uniform(-scale, scale);
  return m;
}

BruteForce brute_force_crf(const Matrix& s, const Matrix& a) {
  const std::size_t n = s.rows(), L = s.cols();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= L;
  std::vector<double> scores(total);
  std::vector<std::size_t> y(n);
  BruteForce out;
  out.best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t code = 0; code < total; ++code) {
    // Most significant digit first so codes run in lexicographic order.
    std::size_t c = code;
    for (std::size_t i = n; i-- > 0;) {
      y[i] = c % L;
      c /= L;
    }
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) f += s(i, y[i]);
    for (std::size_t i = 1; i < n; ++i) f += a(y[i - 1], y[i]);
    scores[code] = f;
    if (f > out.best_score) {
      out.best_score = f;
      out.best = y;
    }
  }
  const double m = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double f : scores) sum += std::exp(f - m);
  out.log_z = m + std::log(sum);
  out.unary = Matrix(n, L, 0.0);
  for (std::size_t code = 0; code < total; ++code) {
    const double p = std::exp(scores[code] - out.log_z);
    out.total_probability += p;
    std::size_t c = code;
    for (std::size_t i = n; i-- > 0;) {
      out.unary(i, c % L) += p;
      c /= L;
    }
  }
  return out;
}

std::vector<Span> oracle_spans(const std::vector<std::string>& labels, SchemeKind scheme) {
  std::vector<Span> spans;
  auto type_of = [](const std::string& l) { return l.substr(2); };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& l = labels[i];
    if (l == "O") continue;
    const char p = l[0];
    bool begins = false;
    if (scheme == SchemeKind::kIobes) {
      begins = p == 'B' || p == 'S';
    } else if (scheme == SchemeKind::kIob2) {
      begins = p == 'B';
    } else {
      // IOB1: I after O or after another type begins; B always begins.
      begins = p == 'B' || i == 0 || labels[i - 1] == "O" || type_of(labels[i - 1]) != type_of(l);
    }
    if (begins) spans.push_back({type_of(l), i, i});
    else spans.back().end = i;
  }
  return spans;
}

std::vector<std::string> random_chunk_labels(std::size_t n, SchemeKind scheme, RngStream& rng) {
  static const char* kTypes[] = {"PER", "LOC", "ORG"};
  std::vector<std::string> out(n, "O");
  std::size_t i = 0;
  std::string prev_type;
  std::size_t prev_end = std::numeric_limits<std::size_t>::max();
  while (i < n) {
    if (rng.uniform() < 0.4) {
      ++i;
      continue;
    }
    const std::size_t len = std::min<std::size_t>(1 + rng.below(3), n - i);
    const std::string type = kTypes[rng.below(3)];
    const bool adjacent_same = prev_end != std::numeric_limits<std::size_t>::max() && prev_end + 1 == i &&
                               prev_type == type;
    for (std::size_t k = 0; k < len; ++k) {
      char p = 'I';
      if (k == 0 && (scheme == SchemeKind::kIob2 || adjacent_same)) p = 'B';
      out[i + k] = std::string(1, p) + "-" + type;
    }
    prev_type = type;
    prev_end = i + len - 1;
    i += len;
  }
  return out;
}

}  // namespace seqlab::testing
