#include <doctest.h>

#include <cmath>
#include <functional>

#include "seqlab/crf.hpp"
#include "seqlab/error.hpp"
#include "support/synthetic.hpp"

using namespace seqlab;

namespace {

double central(double& x, const std::function<double()>& f, double h = 1e-6) {
  const double saved = x;
  x = saved + h;
  const double up = f();
  x = saved - h;
  const double down = f();
  x = saved;
  return (up - down) / (2 * h);
}

}  // namespace

TEST_CASE("path_score examples") {
  const Matrix s = Matrix::from_rows({{1, 0}, {0, 1}});
  const Matrix a = Matrix::from_rows({{0, 2}, {3, 0}});
  CHECK(path_score(s, a, LabelSeq{0, 1}) == 4.0);
  const Matrix one = Matrix::from_rows({{0.5, 1.5, 2.5}});
  CHECK(path_score(one, Matrix(3, 3, 9.0), LabelSeq{2}) == 2.5);
  CHECK(path_score(Matrix(3, 2), Matrix(2, 2), LabelSeq{1, 0, 1}) == 0.0);
  CHECK_THROWS_AS(path_score(s, a, LabelSeq{0}), ShapeError);
}

TEST_CASE("log_partition examples") {
  CHECK(log_partition(Matrix(1, 2), Matrix(2, 2)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(log_partition(Matrix(2, 2), Matrix(2, 2)) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  const Matrix big = Matrix::from_rows({{1000, 0}, {0, 1000}});
  CHECK(std::isfinite(log_partition(big, Matrix(2, 2))));
}

TEST_CASE("log_partition, viterbi and marginals match brute force") {
  RngStream rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(5), labels = 1 + rng.below(4);
    const Matrix s = testing::random_matrix(n, labels, rng);
    const Matrix a = testing::random_matrix(labels, labels, rng);
    const auto bf = testing::brute_force_crf(s, a);
    CHECK(std::abs(log_partition(s, a) - bf.log_z) < 1e-10);
    const Decoded d = viterbi(s, a);
    CHECK(d.labels == bf.best);
    CHECK(std::abs(d.score - bf.best_score) < 1e-9);
    CHECK(std::abs(bf.total_probability - 1.0) < 1e-8);
    const auto m = crf_marginals(s, a);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < labels; ++j) CHECK(std::abs(m.unary(i, j) - bf.unary(i, j)) < 1e-8);

    LabelSeq y(n);
    for (auto& v : y) v = rng.below(labels);
    CHECK(d.score >= path_score(s, a, y));
    const auto nll = crf_nll(s, a, y);
    CHECK(nll.loss == log_partition(s, a) - path_score(s, a, y));
    CHECK(nll.loss >= -1e-12);
  }
}

TEST_CASE("viterbi breaks ties toward smaller labels") {
  const Decoded d = viterbi(Matrix(3, 3), Matrix(3, 3));
  CHECK(d.labels == LabelSeq{0, 0, 0});
  const Matrix s = Matrix::from_rows({{0, 2, 2}, {1, 0, 1}});
  CHECK(viterbi(s, Matrix(3, 3)).labels == LabelSeq{1, 0});
  RngStream rng(1);
  const Matrix row = Matrix::from_rows({{0.1, 0.7, 0.2}});
  CHECK(viterbi(row, testing::random_matrix(3, 3, rng)).labels == LabelSeq{1});
}

TEST_CASE("shifting one score row shifts log Z and keeps the argmax") {
  RngStream rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(4), labels = 2 + rng.below(3);
    Matrix s = testing::random_matrix(n, labels, rng);
    const Matrix a = testing::random_matrix(labels, labels, rng);
    const double z = log_partition(s, a);
    const auto best = viterbi(s, a).labels;
    const std::size_t row = rng.below(n);
    const double c = rng.uniform(-5, 5);
    for (auto& v : s.row(row)) v += c;
    CHECK(std::abs(log_partition(s, a) - (z + c)) < 1e-10);
    CHECK(viterbi(s, a).labels == best);
  }
}

TEST_CASE("crf_nll examples and finite differences") {
  CHECK(crf_nll(Matrix(2, 2), Matrix(2, 2), LabelSeq{1, 0}).loss == doctest::Approx(std::log(4.0)));
  const Matrix peaked = Matrix::from_rows({{50, 0}, {0, 50}});
  CHECK(crf_nll(peaked, Matrix(2, 2), LabelSeq{0, 1}).loss < 1e-20);

  RngStream rng(31);
  Matrix s = testing::random_matrix(4, 3, rng);
  Matrix a = testing::random_matrix(3, 3, rng);
  const LabelSeq y{2, 0, 0, 1};
  const auto r = crf_nll(s, a, y);
  auto loss = [&] { return crf_nll(s, a, y).loss; };
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double num = central(s.data()[k], loss);
    CHECK(std::abs(r.d_scores.data()[k] - num) <= 1e-6 * std::max(1.0, std::abs(num)));
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double num = central(a.data()[k], loss);
    CHECK(std::abs(r.d_transitions.data()[k] - num) <= 1e-6 * std::max(1.0, std::abs(num)));
  }
}

TEST_CASE("softmax_nll and softmax_decode") {
  const auto r = softmax_nll(Matrix(2, 2), LabelSeq{0, 1});
  CHECK(r.loss == doctest::Approx(2 * std::log(2.0)));
  CHECK(r.d_scores(0, 0) == doctest::Approx(-0.5));
  CHECK(r.d_scores(0, 1) == doctest::Approx(0.5));

  const auto d = softmax_decode(Matrix::from_rows({{0, 0}, {1000, 0}, {-1, 3}}));
  CHECK(d.probs(0, 0) == 0.5);
  CHECK(d.probs(1, 0) == doctest::Approx(1.0));
  CHECK(std::isfinite(d.probs(1, 1)));
  CHECK(d.labels == LabelSeq{0, 0, 1});

  RngStream rng(5);
  Matrix s = testing::random_matrix(5, 4, rng, 10.0);
  const auto dd = softmax_decode(s);
  for (std::size_t i = 0; i < 5; ++i) {
    double sum = 0;
    for (double p : dd.probs.row(i)) sum += p;
    CHECK(std::abs(sum - 1.0) < 1e-12);
    CHECK(dd.labels[i] == viterbi(s, Matrix(4, 4)).labels[i]);
  }

  const LabelSeq y{3, 1, 0, 2, 2};
  const auto nll = softmax_nll(s, y);
  auto loss = [&] { return softmax_nll(s, y).loss; };
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double num = central(s.data()[k], loss);
    CHECK(std::abs(nll.d_scores.data()[k] - num) <= 1e-6 * std::max(1.0, std::abs(num)));
  }
}

TEST_CASE("IOBES transition mask constrains decoding") {
  LabelVocab vocab;
  for (const char* l : {"O", "B-PER", "I-PER", "E-PER", "S-PER"}) vocab.add(l);
  const auto mask = iobes_transition_mask(vocab);
  CHECK(mask.transition(1, 2));
  CHECK(mask.transition(1, 3));
  CHECK_FALSE(mask.transition(0, 2));
  CHECK_FALSE(mask.transition(1, 0));
  CHECK(mask.transition(3, 4));
  CHECK_FALSE(mask.start[2]);
  CHECK_FALSE(mask.end[1]);

  // The unconstrained argmax is the illegal O I-PER.
  Matrix s(2, 5);
  s(0, 0) = 3;
  s(1, 2) = 3;
  s(1, 4) = 2;
  CHECK(viterbi(s, Matrix(5, 5)).labels == LabelSeq{0, 2});
  const auto constrained = viterbi(s, Matrix(5, 5), mask);
  CHECK(constrained.labels == LabelSeq{0, 4});
  CHECK(constrained.score == path_score(s, Matrix(5, 5), constrained.labels));
}
