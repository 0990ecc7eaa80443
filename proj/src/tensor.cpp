#include "seqlab/tensor.hpp"

#include <algorithm>
#include <cassert>

namespace seqlab {

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    assert(row.size() == c);
    std::copy(row.begin(), row.end(), m.row(i++).begin());
  }
  return m;
}

RngStream RngStream::derive(std::initializer_list<std::uint64_t> key) {
  std::vector<std::uint32_t> words;
  words.reserve(key.size() * 2);
  for (auto k : key) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  RngStream out;
  out.engine_.seed(seq);
  return out;
}

std::size_t RngStream::below(std::size_t n) {
  assert(n > 0);
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

void gemv_acc(const Matrix& w, std::span<const double> x, std::span<double> y) {
  assert(w.cols() == x.size() && w.rows() == y.size());
  const std::size_t cols = w.cols();
  const double* p = w.data().data();
  for (std::size_t r = 0; r < w.rows(); ++r, p += cols) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += p[c] * x[c];
    y[r] += acc;
  }
}

void gemv_t_acc(const Matrix& w, std::span<const double> x, std::span<double> y) {
  assert(w.rows() == x.size() && w.cols() == y.size());
  const std::size_t cols = w.cols();
  const double* p = w.data().data();
  for (std::size_t r = 0; r < w.rows(); ++r, p += cols) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) y[c] += p[c] * xr;
  }
}

void outer_acc(Matrix& w, std::span<const double> a, std::span<const double> b) {
  assert(w.rows() == a.size() && w.cols() == b.size());
  const std::size_t cols = w.cols();
  double* p = w.data().data();
  for (std::size_t r = 0; r < w.rows(); ++r, p += cols) {
    const double ar = a[r];
    if (ar == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) p[c] += ar * b[c];
  }
}

}  // namespace seqlab
