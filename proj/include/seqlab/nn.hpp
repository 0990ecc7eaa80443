#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "seqlab/tensor.hpp"

namespace seqlab {

enum class InitKind { kWeight, kBias, kForgetBias };

// Weights: uniform in [-r, r], r = sqrt(6 / (fan_in + fan_out)) with
// fan_in = cols, fan_out = rows. Biases: 0. Forget-gate bias: 1.
Param init_params(std::string name, std::size_t rows, std::size_t cols, RngStream& rng,
                  InitKind kind = InitKind::kWeight);
void init_param(Param& param, RngStream& rng, InitKind kind);

// Gate parameters follow
//   i = s(W_i h + U_i x + b_i), f = s(W_f h + U_f x + b_f),
//   o = s(W_o h + U_o x + b_o), g = tanh(W_c h + U_c x + b_c),
//   c = f * c_prev + i * g,     h = o * tanh(c).
struct LstmParams {
  std::size_t hidden = 0;
  std::size_t input = 0;
  Param w_i, w_f, w_o, w_c;  // hidden x hidden
  Param u_i, u_f, u_o, u_c;  // hidden x input
  Param b_i, b_f, b_o, b_c;  // hidden x 1

  LstmParams() = default;
  LstmParams(const std::string& prefix, std::size_t hidden, std::size_t input);

  void init(RngStream& rng);
  std::vector<Param*> params();
  std::vector<const Param*> params() const;
};

struct LstmStepCache {
  Vec x, h_prev, c_prev;
  Vec i, f, o, g;
  Vec c, tanh_c, h;
};

struct LstmStepGrads {
  Vec dx, dh_prev, dc_prev;
};

LstmStepCache lstm_step(const LstmParams& p, std::span<const double> x,
                        std::span<const double> h_prev, std::span<const double> c_prev);
// Accumulates parameter gradients into p; dh and dc are the gradients
// arriving at h_t and c_t.
LstmStepGrads lstm_step_backward(LstmParams& p, const LstmStepCache& cache,
                                 std::span<const double> dh, std::span<const double> dc);

// One direction over a sequence. steps are in processing order; a reversed
// run processes position n-1 first.
struct LstmTrace {
  bool reverse = false;
  std::vector<LstmStepCache> steps;

  std::size_t size() const { return steps.size(); }
  std::size_t step_of(std::size_t position) const {
    return reverse ? steps.size() - 1 - position : position;
  }
  const Vec& output(std::size_t position) const { return steps[step_of(position)].h; }
};

LstmTrace lstm_run(const LstmParams& p, const std::vector<Vec>& xs, bool reverse);
// dhs and the returned dxs are indexed by sequence position.
std::vector<Vec> lstm_run_backward(LstmParams& p, const LstmTrace& trace,
                                   const std::vector<Vec>& dhs);

struct BiLstmParams {
  LstmParams forward;
  LstmParams backward;

  BiLstmParams() = default;
  BiLstmParams(const std::string& prefix, std::size_t hidden, std::size_t input)
      : forward(prefix + ".fw", hidden, input), backward(prefix + ".bw", hidden, input) {}

  std::size_t hidden() const { return forward.hidden; }
  std::size_t input() const { return forward.input; }
  std::size_t output_size() const { return 2 * forward.hidden; }
  void init(RngStream& rng);
  std::vector<Param*> params();
  std::vector<const Param*> params() const;
};

struct BiLstmTrace {
  LstmTrace fw, bw;
  std::vector<Vec> outputs;  // concat(h_fw[t], h_bw[t])
};

BiLstmTrace bilstm_trace(const BiLstmParams& p, const std::vector<Vec>& xs);
std::vector<Vec> bilstm_run(const BiLstmParams& p, const std::vector<Vec>& xs);
std::vector<Vec> bilstm_backward(BiLstmParams& p, const BiLstmTrace& trace,
                                 const std::vector<Vec>& douts);

// Byte embedding: concatenation of the forward LSTM's output at the last
// position and the backward LSTM's output at the first position.
struct ByteEmbedTrace {
  BiLstmTrace lstm;
  Vec embedding;
};

ByteEmbedTrace byte_embed_trace(const BiLstmParams& p, const std::vector<Vec>& projections);
Vec byte_embed(const BiLstmParams& p, const std::vector<Vec>& projections);
std::vector<Vec> byte_embed_backward(BiLstmParams& p, const ByteEmbedTrace& trace,
                                     std::span<const double> dembedding);

Vec joint_embed(std::span<const double> byte_embedding, std::span<const double> word_embedding);

struct LinearParams {
  Param w;  // out x in
  Param b;  // out x 1

  LinearParams() = default;
  LinearParams(const std::string& prefix, std::size_t out, std::size_t in)
      : w(prefix + ".W", out, in), b(prefix + ".b", out, 1) {}

  void init(RngStream& rng);
  std::vector<Param*> params() { return {&w, &b}; }
  std::vector<const Param*> params() const { return {&w, &b}; }
};

Vec linear_forward(const LinearParams& p, std::span<const double> x);
Vec linear_backward(LinearParams& p, std::span<const double> x, std::span<const double> dy);

// n x L scores: linear layer over the word Bi-LSTM outputs, no activation.
Matrix word_scores(const BiLstmParams& word_lstm, const LinearParams& linear,
                   const std::vector<Vec>& joint_embeddings);

void check_dropout_rate(double rate);
// Inverted-dropout multipliers: 0 with probability `rate`, else 1/(1-rate).
Vec dropout_mask(std::size_t size, double rate, RngStream& rng);
Vec dropout(std::span<const double> x, double rate, RngStream& rng, bool training);
void apply_mask(std::span<double> x, std::span<const double> mask);

double sigmoid(double x);

}  // namespace seqlab
