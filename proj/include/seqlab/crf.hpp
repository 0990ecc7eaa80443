#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "seqlab/corpus.hpp"
#include "seqlab/tensor.hpp"

namespace seqlab {

// Scores are n x L with s(i, j) the unnormalized log-probability of label j
// at position i. Transitions are L x L with A(i, j) scoring label i -> j.
// The total score of a labeling is sum_i s(i, y_i) + sum_i A(y_i, y_{i+1});
// there are no start or stop transitions.

using LabelSeq = std::vector<std::size_t>;

double log_sum_exp(std::span<const double> xs);

double path_score(const Matrix& scores, const Matrix& transitions, std::span<const std::size_t> labels);
double log_partition(const Matrix& scores, const Matrix& transitions);

struct CrfMarginals {
  double log_z = 0.0;
  Matrix unary;     // n x L, P(y_i = j)
  Matrix pairwise;  // L x L, sum over i of P(y_i = a, y_{i+1} = b)
};

CrfMarginals crf_marginals(const Matrix& scores, const Matrix& transitions);

struct NllResult {
  double loss = 0.0;
  Matrix d_scores;       // n x L
  Matrix d_transitions;  // L x L; empty for the softmax objective
};

// -log p(y | w) = log Z - f(y | w) with its gradients.
NllResult crf_nll(const Matrix& scores, const Matrix& transitions, std::span<const std::size_t> labels);
// Sum over positions of per-token softmax cross-entropy.
NllResult softmax_nll(const Matrix& scores, std::span<const std::size_t> labels);

struct Decoded {
  LabelSeq labels;
  double score = 0.0;
};

// Allowed-transition structure for constrained decoding.
struct TransitionMask {
  std::size_t labels = 0;
  std::vector<char> allowed;  // labels x labels, row = from
  std::vector<char> start;
  std::vector<char> end;

  bool transition(std::size_t from, std::size_t to) const { return allowed[from * labels + to] != 0; }
};

// IOBES legality: B-X/I-X continue with I-X/E-X; O/E-*/S-* continue with
// O/B-*/S-*; sequences start with O/B/S and end with O/E/S. Labels that are
// not IOBES-shaped are unconstrained.
TransitionMask iobes_transition_mask(const LabelVocab& vocab);

// Highest-scoring labeling; ties go to the smaller label index. The returned
// score is path_score of the returned labels.
Decoded viterbi(const Matrix& scores, const Matrix& transitions);
Decoded viterbi(const Matrix& scores, const Matrix& transitions, const TransitionMask& mask);

struct SoftmaxDecoded {
  LabelSeq labels;
  Matrix probs;
};

SoftmaxDecoded softmax_decode(const Matrix& scores);

}  // namespace seqlab
