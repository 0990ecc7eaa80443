#include <doctest.h>

#include <sstream>

#include "seqlab/embeddings.hpp"
#include "seqlab/error.hpp"

using namespace seqlab;

namespace {

EmbeddingTable load(const std::string& text, CaseMode mode = CaseMode::kCased) {
  std::istringstream in(text);
  return load_text_embeddings(in, mode);
}

}  // namespace

TEST_CASE("load_text_embeddings reads vectors") {
  const auto t = load("the 0.1 -0.2 3e-1\nParis 1 2 3\n");
  CHECK(t.dim() == 3);
  CHECK(t.size() == 2);
  const auto v = t.vector(t.lookup("the"));
  CHECK(v[0] == 0.1);
  CHECK(v[1] == -0.2);
  CHECK(v[2] == 0.3);
  CHECK(t.lookup("paris") == EmbeddingTable::kUnknown);
}

TEST_CASE("load_text_embeddings errors") {
  try {
    load("a 1 2\nb 1 2 3\n");
    FAIL("expected a dimension mismatch");
  } catch (const LoadError& e) {
    CHECK(e.kind() == LoadErrorKind::kDimensionMismatch);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  try {
    load("a 1 x\n");
    FAIL("expected a non-numeric error");
  } catch (const LoadError& e) {
    CHECK(e.kind() == LoadErrorKind::kNonNumeric);
  }
  std::istringstream in("a 1 2\n");
  CHECK_THROWS_AS(load_text_embeddings(in, CaseMode::kCased, 3), LoadError);
  CHECK_THROWS_AS(load_text_embeddings("/nonexistent/vectors.txt", CaseMode::kCased), LoadError);
}

TEST_CASE("uncased lookup folds case and keeps the first vector") {
  const auto t = load("Paris 1 1\nparis 2 2\nÉCOLE 3 3\n", CaseMode::kUncased);
  CHECK(t.size() == 2);
  CHECK(t.vector(t.lookup("PARIS"))[0] == 1.0);
  CHECK(t.lookup("école") != EmbeddingTable::kUnknown);
  CHECK(fold_case("ÀÉÎ Σ Д") == "àéî σ д");

  const auto cased = load("Paris 1 1\nparis 2 2\n");
  CHECK(cased.size() == 2);
  CHECK(cased.vector(cased.lookup("paris"))[0] == 2.0);
  CHECK(cased.lookup("PARIS") == EmbeddingTable::kUnknown);
}

TEST_CASE("vocabulary hash depends on tokens, order, dimension and case mode") {
  const auto a = load("x 1\ny 2\n");
  CHECK(a.vocabulary_hash() == load("x 5\ny 6\n").vocabulary_hash());
  CHECK(a.vocabulary_hash() != load("y 1\nx 2\n").vocabulary_hash());
  CHECK(a.vocabulary_hash() != load("x 1\ny 2\n", CaseMode::kUncased).vocabulary_hash());
  CHECK(a.vocabulary_hash() != load("x 1 1\ny 2 2\n").vocabulary_hash());
}

TEST_CASE("word_to_bytes wraps UTF-8 bytes in markers") {
  CHECK(word_to_bytes("EU") == ByteSequence{0x01, 'E', 'U', 0x02});
  CHECK(word_to_bytes("é") == ByteSequence{0x01, 0xC3, 0xA9, 0x02});
  CHECK(word_to_bytes("") == ByteSequence{0x01, 0x02});
}

TEST_CASE("project_bytes selects columns and scatters gradients") {
  Param b("B", 3, 256);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 256; ++c) b.value(r, c) = r * 1000.0 + c;
  const auto bytes = word_to_bytes("aa");
  const auto xs = project_bytes(b, bytes);
  REQUIRE(xs.size() == 4);
  CHECK(xs[1] == Vec{97, 1097, 2097});
  CHECK(xs[0] == Vec{1, 1001, 2001});

  // Loss = sum_t <g_t, x_t>: d/dB[:, j] is the sum of g_t over positions with byte j.
  const std::vector<Vec> grads = {{1, 0, 0}, {0.5, 1, 0}, {0.25, 0, 2}, {0, 0, 1}};
  project_bytes_backward(b, bytes, grads);
  CHECK(b.grad(0, 'a') == 0.75);
  CHECK(b.grad(1, 'a') == 1.0);
  CHECK(b.grad(2, 'a') == 2.0);
  CHECK(b.grad(0, 0x01) == 1.0);
  CHECK(b.grad(2, 0x02) == 1.0);
  CHECK(b.grad(0, 'b') == 0.0);

  // Finite differences on the repeated byte's column.
  auto loss = [&] {
    const auto ys = project_bytes(b, bytes);
    double s = 0;
    for (std::size_t t = 0; t < ys.size(); ++t)
      for (std::size_t k = 0; k < 3; ++k) s += grads[t][k] * ys[t][k] * ys[t][k] * 1e-6;
    return s;
  };
  b.zero_grad();
  std::vector<Vec> g2(4, Vec(3));
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t k = 0; k < 3; ++k) g2[t][k] = 2e-6 * grads[t][k] * xs[t][k];
  project_bytes_backward(b, bytes, g2);
  for (std::size_t k = 0; k < 3; ++k) {
    const double h = 1e-3, saved = b.value(k, 'a');
    b.value(k, 'a') = saved + h;
    const double up = loss();
    b.value(k, 'a') = saved - h;
    const double down = loss();
    b.value(k, 'a') = saved;
    CHECK(b.grad(k, 'a') == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("uncased lookup ignores case") {
  const auto t = load("abc 1\nxyz 2\nÄÖÜ 3\n", CaseMode::kUncased);
  RngStream rng(4);
  const std::vector<std::string> words = {"abc", "xyz", "äöü", "qqq"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string w = words[rng.below(words.size())];
    std::string mixed;
    for (char ch : w) mixed.push_back(ch >= 'a' && ch <= 'z' && rng.below(2) ? static_cast<char>(ch - 32) : ch);
    CHECK(t.lookup(mixed) == t.lookup(fold_case(mixed)));
    CHECK(t.lookup(mixed) == t.lookup(w));
  }
}
