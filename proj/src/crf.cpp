#include "seqlab/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seqlab/error.hpp"

namespace seqlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_shapes(const Matrix& s, const Matrix& a) {
  if (s.rows() == 0 || s.cols() == 0) throw ShapeError("score matrix must be non-empty");
  if (a.rows() != s.cols() || a.cols() != s.cols())
    throw ShapeError("transition matrix must be " + std::to_string(s.cols()) + "x" +
                     std::to_string(s.cols()));
}

void check_labels(const Matrix& s, std::span<const std::size_t> y) {
  if (y.size() != s.rows())
    throw ShapeError("label sequence has length " + std::to_string(y.size()) + ", expected " +
                     std::to_string(s.rows()));
  for (auto label : y)
    if (label >= s.cols()) throw ShapeError("label index " + std::to_string(label) + " out of range");
}

// alpha(t, j) = log-sum of all prefixes ending in j at t.
Matrix forward_table(const Matrix& s, const Matrix& a) {
  const std::size_t n = s.rows(), L = s.cols();
  Matrix alpha(n, L);
  std::copy(s.row(0).begin(), s.row(0).end(), alpha.row(0).begin());
  Vec tmp(L);
  for (std::size_t t = 1; t < n; ++t)
    for (std::size_t j = 0; j < L; ++j) {
      for (std::size_t i = 0; i < L; ++i) tmp[i] = alpha(t - 1, i) + a(i, j);
      alpha(t, j) = s(t, j) + log_sum_exp(tmp);
    }
  return alpha;
}

// beta(t, i) = log-sum of all suffixes after t given y_t = i.
Matrix backward_table(const Matrix& s, const Matrix& a) {
  const std::size_t n = s.rows(), L = s.cols();
  Matrix beta(n, L, 0.0);
  Vec tmp(L);
  for (std::size_t t = n - 1; t-- > 0;)
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = 0; j < L; ++j) tmp[j] = a(i, j) + s(t + 1, j) + beta(t + 1, j);
      beta(t, i) = log_sum_exp(tmp);
    }
  return beta;
}

}  // namespace

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return kNegInf;
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - m);
  return m + std::log(sum);
}

double path_score(const Matrix& s, const Matrix& a, std::span<const std::size_t> y) {
  check_shapes(s, a);
  check_labels(s, y);
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += s(i, y[i]);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) total += a(y[i], y[i + 1]);
  return total;
}

double log_partition(const Matrix& s, const Matrix& a) {
  check_shapes(s, a);
  const Matrix alpha = forward_table(s, a);
  return log_sum_exp(alpha.row(s.rows() - 1));
}

CrfMarginals crf_marginals(const Matrix& s, const Matrix& a) {
  check_shapes(s, a);
  const std::size_t n = s.rows(), L = s.cols();
  const Matrix alpha = forward_table(s, a);
  const Matrix beta = backward_table(s, a);
  CrfMarginals m;
  m.log_z = log_sum_exp(alpha.row(n - 1));
  m.unary = Matrix(n, L);
  m.pairwise = Matrix(L, L, 0.0);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < L; ++j) m.unary(t, j) = std::exp(alpha(t, j) + beta(t, j) - m.log_z);
  for (std::size_t t = 0; t + 1 < n; ++t)
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = 0; j < L; ++j)
        m.pairwise(i, j) += std::exp(alpha(t, i) + a(i, j) + s(t + 1, j) + beta(t + 1, j) - m.log_z);
  return m;
}

NllResult crf_nll(const Matrix& s, const Matrix& a, std::span<const std::size_t> y) {
  check_shapes(s, a);
  check_labels(s, y);
  CrfMarginals m = crf_marginals(s, a);
  NllResult r;
  r.loss = m.log_z - path_score(s, a, y);
  r.d_scores = std::move(m.unary);
  r.d_transitions = std::move(m.pairwise);
  for (std::size_t i = 0; i < y.size(); ++i) r.d_scores(i, y[i]) -= 1.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) r.d_transitions(y[i], y[i + 1]) -= 1.0;
  return r;
}

NllResult softmax_nll(const Matrix& s, std::span<const std::size_t> y) {
  check_labels(s, y);
  NllResult r;
  r.d_scores = Matrix(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const double lse = log_sum_exp(s.row(i));
    r.loss += lse - s(i, y[i]);
    for (std::size_t j = 0; j < s.cols(); ++j) r.d_scores(i, j) = std::exp(s(i, j) - lse);
    r.d_scores(i, y[i]) -= 1.0;
  }
  return r;
}

namespace {

Decoded viterbi_impl(const Matrix& s, const Matrix& a, const TransitionMask* mask) {
  check_shapes(s, a);
  const std::size_t n = s.rows(), L = s.cols();
  if (mask && mask->labels != L) throw ShapeError("transition mask size does not match label count");
  auto trans = [&](std::size_t i, std::size_t j) {
    return (!mask || mask->transition(i, j)) ? a(i, j) : kNegInf;
  };
  Matrix delta(n, L);
  std::vector<std::size_t> back(n * L, 0);
  for (std::size_t j = 0; j < L; ++j)
    delta(0, j) = (!mask || mask->start[j]) ? s(0, j) : kNegInf;
  for (std::size_t t = 1; t < n; ++t)
    for (std::size_t j = 0; j < L; ++j) {
      std::size_t best = 0;
      double best_score = delta(t - 1, 0) + trans(0, j);
      for (std::size_t i = 1; i < L; ++i) {
        const double v = delta(t - 1, i) + trans(i, j);
        if (v > best_score) {
          best_score = v;
          best = i;
        }
      }
      delta(t, j) = s(t, j) + best_score;
      back[t * L + j] = best;
    }
  std::size_t last = 0;
  double last_score = kNegInf;
  for (std::size_t j = 0; j < L; ++j) {
    const double v = (!mask || mask->end[j]) ? delta(n - 1, j) : kNegInf;
    if (v > last_score || (j == 0 && v == last_score)) {
      last_score = v;
      last = j;
    }
  }
  Decoded out;
  if (last_score == kNegInf) {
    // The mask rules out every path; fall back to unconstrained decoding.
    return viterbi_impl(s, a, nullptr);
  }
  out.labels.resize(n);
  out.labels[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) out.labels[t - 1] = back[t * L + out.labels[t]];
  out.score = path_score(s, a, out.labels);
  return out;
}

}  // namespace

Decoded viterbi(const Matrix& s, const Matrix& a) { return viterbi_impl(s, a, nullptr); }

Decoded viterbi(const Matrix& s, const Matrix& a, const TransitionMask& mask) {
  return viterbi_impl(s, a, &mask);
}

TransitionMask iobes_transition_mask(const LabelVocab& vocab) {
  const std::size_t L = vocab.size();
  TransitionMask m;
  m.labels = L;
  m.allowed.assign(L * L, 1);
  m.start.assign(L, 1);
  m.end.assign(L, 1);
  struct Shape {
    char tag = 0;  // 0: not IOBES-shaped
    std::string type;
  };
  std::vector<Shape> shapes(L);
  for (std::size_t k = 0; k < L; ++k) {
    const std::string& l = vocab.label(k);
    if (l == "O") shapes[k].tag = 'O';
    else if (l.size() >= 3 && l[1] == '-' && std::string_view("BIES").find(l[0]) != std::string_view::npos)
      shapes[k] = {l[0], l.substr(2)};
  }
  for (std::size_t i = 0; i < L; ++i) {
    const Shape& from = shapes[i];
    if (from.tag == 'B' || from.tag == 'I') m.end[i] = 0;
    for (std::size_t j = 0; j < L; ++j) {
      const Shape& to = shapes[j];
      if (!from.tag || !to.tag) continue;
      const bool inside_next = to.tag == 'I' || to.tag == 'E';
      bool ok;
      if (from.tag == 'B' || from.tag == 'I') ok = inside_next && to.type == from.type;
      else ok = !inside_next;
      m.allowed[i * L + j] = ok ? 1 : 0;
    }
  }
  for (std::size_t j = 0; j < L; ++j)
    if (shapes[j].tag == 'I' || shapes[j].tag == 'E') m.start[j] = 0;
  return m;
}

SoftmaxDecoded softmax_decode(const Matrix& s) {
  SoftmaxDecoded out;
  out.labels.resize(s.rows());
  out.probs = Matrix(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const auto row = s.row(i);
    const double m = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < s.cols(); ++j) sum += out.probs(i, j) = std::exp(row[j] - m);
    for (std::size_t j = 0; j < s.cols(); ++j) out.probs(i, j) /= sum;
    out.labels[i] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace seqlab
