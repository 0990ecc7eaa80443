#include "seqlab/nn.hpp"

#include <cmath>

#include "seqlab/error.hpp"

namespace seqlab {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void init_param(Param& param, RngStream& rng, InitKind kind) {
  switch (kind) {
    case InitKind::kBias:
      param.value.fill(0.0);
      break;
    case InitKind::kForgetBias:
      param.value.fill(1.0);
      break;
    case InitKind::kWeight: {
      const double r = std::sqrt(6.0 / static_cast<double>(param.rows() + param.cols()));
      for (auto& v : param.value.data()) v = rng.uniform(-r, r);
      break;
    }
  }
  param.zero_grad();
}

Param init_params(std::string name, std::size_t rows, std::size_t cols, RngStream& rng,
                  InitKind kind) {
  Param p(std::move(name), rows, cols);
  init_param(p, rng, kind);
  return p;
}

LstmParams::LstmParams(const std::string& prefix, std::size_t hidden, std::size_t input)
    : hidden(hidden),
      input(input),
      w_i(prefix + ".W_i", hidden, hidden),
      w_f(prefix + ".W_f", hidden, hidden),
      w_o(prefix + ".W_o", hidden, hidden),
      w_c(prefix + ".W_c", hidden, hidden),
      u_i(prefix + ".U_i", hidden, input),
      u_f(prefix + ".U_f", hidden, input),
      u_o(prefix + ".U_o", hidden, input),
      u_c(prefix + ".U_c", hidden, input),
      b_i(prefix + ".b_i", hidden, 1),
      b_f(prefix + ".b_f", hidden, 1),
      b_o(prefix + ".b_o", hidden, 1),
      b_c(prefix + ".b_c", hidden, 1) {}

void LstmParams::init(RngStream& rng) {
  for (Param* w : {&w_i, &w_f, &w_o, &w_c, &u_i, &u_f, &u_o, &u_c}) init_param(*w, rng, InitKind::kWeight);
  for (Param* b : {&b_i, &b_o, &b_c}) init_param(*b, rng, InitKind::kBias);
  init_param(b_f, rng, InitKind::kForgetBias);
}

std::vector<Param*> LstmParams::params() {
  return {&w_i, &w_f, &w_o, &w_c, &u_i, &u_f, &u_o, &u_c, &b_i, &b_f, &b_o, &b_c};
}

std::vector<const Param*> LstmParams::params() const {
  return {&w_i, &w_f, &w_o, &w_c, &u_i, &u_f, &u_o, &u_c, &b_i, &b_f, &b_o, &b_c};
}

LstmStepCache lstm_step(const LstmParams& p, std::span<const double> x,
                        std::span<const double> h_prev, std::span<const double> c_prev) {
  const std::size_t H = p.hidden;
  if (x.size() != p.input || h_prev.size() != H || c_prev.size() != H)
    throw ShapeError("lstm_step: expected input " + std::to_string(p.input) + " and state " +
                     std::to_string(H) + ", got " + std::to_string(x.size()) + "/" +
                     std::to_string(h_prev.size()) + "/" + std::to_string(c_prev.size()));
  LstmStepCache s;
  s.x.assign(x.begin(), x.end());
  s.h_prev.assign(h_prev.begin(), h_prev.end());
  s.c_prev.assign(c_prev.begin(), c_prev.end());

  auto pre = [&](const Param& w, const Param& u, const Param& b) {
    Vec z(b.value.data());
    gemv_acc(w.value, h_prev, z);
    gemv_acc(u.value, x, z);
    return z;
  };
  s.i = pre(p.w_i, p.u_i, p.b_i);
  s.f = pre(p.w_f, p.u_f, p.b_f);
  s.o = pre(p.w_o, p.u_o, p.b_o);
  s.g = pre(p.w_c, p.u_c, p.b_c);
  s.c.resize(H);
  s.tanh_c.resize(H);
  s.h.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    s.i[k] = sigmoid(s.i[k]);
    s.f[k] = sigmoid(s.f[k]);
    s.o[k] = sigmoid(s.o[k]);
    s.g[k] = std::tanh(s.g[k]);
    s.c[k] = s.f[k] * c_prev[k] + s.i[k] * s.g[k];
    s.tanh_c[k] = std::tanh(s.c[k]);
    s.h[k] = s.o[k] * s.tanh_c[k];
  }
  return s;
}

LstmStepGrads lstm_step_backward(LstmParams& p, const LstmStepCache& s, std::span<const double> dh,
                                 std::span<const double> dc) {
  const std::size_t H = p.hidden;
  Vec dzi(H), dzf(H), dzo(H), dzg(H);
  LstmStepGrads out;
  out.dc_prev.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    const double dc_total = dc[k] + dh[k] * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
    const double d_o = dh[k] * s.tanh_c[k];
    const double d_i = dc_total * s.g[k];
    const double d_g = dc_total * s.i[k];
    const double d_f = dc_total * s.c_prev[k];
    out.dc_prev[k] = dc_total * s.f[k];
    dzi[k] = d_i * s.i[k] * (1.0 - s.i[k]);
    dzf[k] = d_f * s.f[k] * (1.0 - s.f[k]);
    dzo[k] = d_o * s.o[k] * (1.0 - s.o[k]);
    dzg[k] = d_g * (1.0 - s.g[k] * s.g[k]);
  }
  out.dh_prev.assign(H, 0.0);
  out.dx.assign(p.input, 0.0);
  auto gate = [&](Param& w, Param& u, Param& b, const Vec& dz) {
    outer_acc(w.grad, dz, s.h_prev);
    outer_acc(u.grad, dz, s.x);
    for (std::size_t k = 0; k < H; ++k) b.grad(k, 0) += dz[k];
    gemv_t_acc(w.value, dz, out.dh_prev);
    gemv_t_acc(u.value, dz, out.dx);
  };
  gate(p.w_i, p.u_i, p.b_i, dzi);
  gate(p.w_f, p.u_f, p.b_f, dzf);
  gate(p.w_o, p.u_o, p.b_o, dzo);
  gate(p.w_c, p.u_c, p.b_c, dzg);
  return out;
}

LstmTrace lstm_run(const LstmParams& p, const std::vector<Vec>& xs, bool reverse) {
  if (xs.empty()) throw ShapeError("lstm_run: empty input sequence");
  LstmTrace trace;
  trace.reverse = reverse;
  trace.steps.reserve(xs.size());
  Vec h(p.hidden, 0.0), c(p.hidden, 0.0);
  const std::size_t n = xs.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    trace.steps.push_back(lstm_step(p, xs[t], h, c));
    h = trace.steps.back().h;
    c = trace.steps.back().c;
  }
  return trace;
}

std::vector<Vec> lstm_run_backward(LstmParams& p, const LstmTrace& trace,
                                   const std::vector<Vec>& dhs) {
  const std::size_t n = trace.size();
  if (dhs.size() != n) throw ShapeError("lstm_run_backward: gradient count mismatch");
  std::vector<Vec> dxs(n);
  Vec dh_next(p.hidden, 0.0), dc_next(p.hidden, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    const std::size_t t = trace.reverse ? n - 1 - k : k;
    Vec dh = dhs[t];
    for (std::size_t j = 0; j < p.hidden; ++j) dh[j] += dh_next[j];
    auto g = lstm_step_backward(p, trace.steps[k], dh, dc_next);
    dxs[t] = std::move(g.dx);
    dh_next = std::move(g.dh_prev);
    dc_next = std::move(g.dc_prev);
  }
  return dxs;
}

void BiLstmParams::init(RngStream& rng) {
  forward.init(rng);
  backward.init(rng);
}

std::vector<Param*> BiLstmParams::params() {
  auto out = forward.params();
  auto bw = backward.params();
  out.insert(out.end(), bw.begin(), bw.end());
  return out;
}

std::vector<const Param*> BiLstmParams::params() const {
  auto out = forward.params();
  auto bw = backward.params();
  out.insert(out.end(), bw.begin(), bw.end());
  return out;
}

BiLstmTrace bilstm_trace(const BiLstmParams& p, const std::vector<Vec>& xs) {
  BiLstmTrace trace;
  trace.fw = lstm_run(p.forward, xs, false);
  trace.bw = lstm_run(p.backward, xs, true);
  trace.outputs.resize(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const Vec& hf = trace.fw.output(t);
    const Vec& hb = trace.bw.output(t);
    Vec& out = trace.outputs[t];
    out.reserve(hf.size() + hb.size());
    out.insert(out.end(), hf.begin(), hf.end());
    out.insert(out.end(), hb.begin(), hb.end());
  }
  return trace;
}

std::vector<Vec> bilstm_run(const BiLstmParams& p, const std::vector<Vec>& xs) {
  return bilstm_trace(p, xs).outputs;
}

std::vector<Vec> bilstm_backward(BiLstmParams& p, const BiLstmTrace& trace,
                                 const std::vector<Vec>& douts) {
  const std::size_t n = trace.outputs.size();
  const std::size_t H = p.hidden();
  if (douts.size() != n) throw ShapeError("bilstm_backward: gradient count mismatch");
  std::vector<Vec> dfw(n), dbw(n);
  for (std::size_t t = 0; t < n; ++t) {
    dfw[t].assign(douts[t].begin(), douts[t].begin() + static_cast<std::ptrdiff_t>(H));
    dbw[t].assign(douts[t].begin() + static_cast<std::ptrdiff_t>(H), douts[t].end());
  }
  auto dxs = lstm_run_backward(p.forward, trace.fw, dfw);
  auto dxb = lstm_run_backward(p.backward, trace.bw, dbw);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < dxs[t].size(); ++j) dxs[t][j] += dxb[t][j];
  return dxs;
}

ByteEmbedTrace byte_embed_trace(const BiLstmParams& p, const std::vector<Vec>& projections) {
  ByteEmbedTrace out;
  out.lstm = bilstm_trace(p, projections);
  const std::size_t last = projections.size() - 1;
  const Vec& hf = out.lstm.fw.output(last);
  const Vec& hb = out.lstm.bw.output(0);
  out.embedding.reserve(hf.size() + hb.size());
  out.embedding.insert(out.embedding.end(), hf.begin(), hf.end());
  out.embedding.insert(out.embedding.end(), hb.begin(), hb.end());
  return out;
}

Vec byte_embed(const BiLstmParams& p, const std::vector<Vec>& projections) {
  return byte_embed_trace(p, projections).embedding;
}

std::vector<Vec> byte_embed_backward(BiLstmParams& p, const ByteEmbedTrace& trace,
                                     std::span<const double> dembedding) {
  const std::size_t n = trace.lstm.outputs.size();
  const std::size_t H = p.hidden();
  std::vector<Vec> dfw(n, Vec(H, 0.0)), dbw(n, Vec(H, 0.0));
  std::copy(dembedding.begin(), dembedding.begin() + static_cast<std::ptrdiff_t>(H), dfw[n - 1].begin());
  std::copy(dembedding.begin() + static_cast<std::ptrdiff_t>(H), dembedding.end(), dbw[0].begin());
  auto dxs = lstm_run_backward(p.forward, trace.lstm.fw, dfw);
  auto dxb = lstm_run_backward(p.backward, trace.lstm.bw, dbw);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < dxs[t].size(); ++j) dxs[t][j] += dxb[t][j];
  return dxs;
}

Vec joint_embed(std::span<const double> byte_embedding, std::span<const double> word_embedding) {
  Vec out;
  out.reserve(byte_embedding.size() + word_embedding.size());
  out.insert(out.end(), byte_embedding.begin(), byte_embedding.end());
  out.insert(out.end(), word_embedding.begin(), word_embedding.end());
  return out;
}

void LinearParams::init(RngStream& rng) {
  init_param(w, rng, InitKind::kWeight);
  init_param(b, rng, InitKind::kBias);
}

Vec linear_forward(const LinearParams& p, std::span<const double> x) {
  if (x.size() != p.w.cols())
    throw ShapeError("linear: input has " + std::to_string(x.size()) + " components, expected " +
                     std::to_string(p.w.cols()));
  Vec y(p.b.value.data());
  gemv_acc(p.w.value, x, y);
  return y;
}

Vec linear_backward(LinearParams& p, std::span<const double> x, std::span<const double> dy) {
  outer_acc(p.w.grad, dy, x);
  for (std::size_t k = 0; k < dy.size(); ++k) p.b.grad(k, 0) += dy[k];
  Vec dx(x.size(), 0.0);
  gemv_t_acc(p.w.value, dy, dx);
  return dx;
}

Matrix word_scores(const BiLstmParams& word_lstm, const LinearParams& linear,
                   const std::vector<Vec>& joint_embeddings) {
  const auto outputs = bilstm_run(word_lstm, joint_embeddings);
  Matrix s(outputs.size(), linear.w.rows());
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    const Vec y = linear_forward(linear, outputs[t]);
    std::copy(y.begin(), y.end(), s.row(t).begin());
  }
  return s;
}

void check_dropout_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
}

Vec dropout_mask(std::size_t size, double rate, RngStream& rng) {
  check_dropout_rate(rate);
  Vec mask(size, 1.0);
  if (rate == 0.0) return mask;
  const double keep = 1.0 / (1.0 - rate);
  for (auto& m : mask) m = rng.uniform() < rate ? 0.0 : keep;
  return mask;
}

Vec dropout(std::span<const double> x, double rate, RngStream& rng, bool training) {
  check_dropout_rate(rate);
  Vec out(x.begin(), x.end());
  if (!training || rate == 0.0) return out;
  apply_mask(out, dropout_mask(x.size(), rate, rng));
  return out;
}

void apply_mask(std::span<double> x, std::span<const double> mask) {
  for (std::size_t k = 0; k < x.size(); ++k) x[k] *= mask[k];
}

}  // namespace seqlab
