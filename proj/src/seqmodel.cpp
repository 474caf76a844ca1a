#include "scoopsim/seqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <omp.h>

#include "json.hpp"

namespace scoopsim::seqmodel {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Normalization

VectorXd NormStats::normalize(const VectorXd& x) const {
  VectorXd y(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double span = max[i] - min[i];
    y[i] = span > 0.0 ? (x[i] - min[i]) / span : 0.5;
  }
  return y;
}

VectorXd NormStats::denormalize(const VectorXd& y) const {
  VectorXd x(y.size());
  for (int i = 0; i < y.size(); ++i) {
    const double span = max[i] - min[i];
    x[i] = span > 0.0 ? min[i] + y[i] * span : min[i];
  }
  return x;
}

// ---------------------------------------------------------------------------
// Model

LstmModel::LstmModel(const ModelConfig& cfg) : cfg_(cfg) {
  if (cfg.layers < 1 || cfg.hidden < 1 || cfg.input < 1 || cfg.output < 1) {
    throw std::invalid_argument("bad model dimensions");
  }
  int off = 0;
  layer_off_.resize(cfg.layers);
  for (int l = 0; l < cfg.layers; ++l) {
    const int in = layer_input(l);
    layer_off_[l].wx = off;
    off += 4 * cfg.hidden * in;
    layer_off_[l].wh = off;
    off += 4 * cfg.hidden * cfg.hidden;
    layer_off_[l].b = off;
    off += 4 * cfg.hidden;
  }
  head_w_off_ = off;
  off += cfg.output * cfg.hidden;
  head_b_off_ = off;
  off += cfg.output;
  params_ = VectorXd::Zero(off);
}

Eigen::Map<MatrixXd> LstmModel::wx(int l) {
  return {params_.data() + layer_off_[l].wx, 4 * cfg_.hidden, layer_input(l)};
}
Eigen::Map<MatrixXd> LstmModel::wh(int l) {
  return {params_.data() + layer_off_[l].wh, 4 * cfg_.hidden, cfg_.hidden};
}
Eigen::Map<VectorXd> LstmModel::bias(int l) {
  return {params_.data() + layer_off_[l].b, 4 * cfg_.hidden};
}
Eigen::Map<MatrixXd> LstmModel::head_w() {
  return {params_.data() + head_w_off_, cfg_.output, cfg_.hidden};
}
Eigen::Map<VectorXd> LstmModel::head_b() {
  return {params_.data() + head_b_off_, cfg_.output};
}
Eigen::Map<const MatrixXd> LstmModel::wx(int l) const {
  return {params_.data() + layer_off_[l].wx, 4 * cfg_.hidden, layer_input(l)};
}
Eigen::Map<const MatrixXd> LstmModel::wh(int l) const {
  return {params_.data() + layer_off_[l].wh, 4 * cfg_.hidden, cfg_.hidden};
}
Eigen::Map<const VectorXd> LstmModel::bias(int l) const {
  return {params_.data() + layer_off_[l].b, 4 * cfg_.hidden};
}
Eigen::Map<const MatrixXd> LstmModel::head_w() const {
  return {params_.data() + head_w_off_, cfg_.output, cfg_.hidden};
}
Eigen::Map<const VectorXd> LstmModel::head_b() const {
  return {params_.data() + head_b_off_, cfg_.output};
}

void LstmModel::init_random(Rng& rng) {
  const int h = cfg_.hidden;
  for (int l = 0; l < cfg_.layers; ++l) {
    const double sx = 1.0 / std::sqrt(static_cast<double>(layer_input(l)));
    auto mx = wx(l);
    for (int c = 0; c < mx.cols(); ++c) {
      for (int r = 0; r < mx.rows(); ++r) mx(r, c) = rng.uniform(-sx, sx);
    }
    const double sh = 1.0 / std::sqrt(static_cast<double>(h));
    auto mh = wh(l);
    for (int c = 0; c < mh.cols(); ++c) {
      for (int r = 0; r < mh.rows(); ++r) mh(r, c) = rng.uniform(-sh, sh);
    }
    auto b = bias(l);
    b.setZero();
    b.segment(h, h).setOnes();  // forget-gate bias
  }
  const double sh = 1.0 / std::sqrt(static_cast<double>(h));
  auto hw = head_w();
  for (int c = 0; c < hw.cols(); ++c) {
    for (int r = 0; r < hw.rows(); ++r) hw(r, c) = rng.uniform(-sh, sh);
  }
  head_b().setZero();
}

LstmModel::Memory LstmModel::zero_memory() const {
  Memory m;
  m.h.assign(cfg_.layers, VectorXd::Zero(cfg_.hidden));
  m.c.assign(cfg_.layers, VectorXd::Zero(cfg_.hidden));
  return m;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

VectorXd LstmModel::step(const VectorXd& input, Memory& mem) const {
  if (input.size() != cfg_.input) throw std::invalid_argument("input dim mismatch");
  const int h = cfg_.hidden;
  VectorXd a = input;
  VectorXd z(4 * h);
  for (int l = 0; l < cfg_.layers; ++l) {
    z.noalias() = wx(l) * a;
    z.noalias() += wh(l) * mem.h[l];
    z += bias(l);
    VectorXd& c = mem.c[l];
    VectorXd& hv = mem.h[l];
    for (int k = 0; k < h; ++k) {
      const double ig = sigmoid(z[k]);
      const double fg = sigmoid(z[h + k]);
      const double gg = std::tanh(z[2 * h + k]);
      const double og = sigmoid(z[3 * h + k]);
      c[k] = fg * c[k] + ig * gg;
      hv[k] = og * std::tanh(c[k]);
    }
    a = hv;
  }
  VectorXd y = head_w() * a;
  y += head_b();
  return y;
}

MatrixXd LstmModel::forward(const MatrixXd& inputs, Memory& mem) const {
  MatrixXd out(cfg_.output, inputs.cols());
  for (int t = 0; t < inputs.cols(); ++t) {
    out.col(t) = step(inputs.col(t), mem);
  }
  return out;
}

double mse_loss(const MatrixXd& pred, const MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("loss shape mismatch");
  }
  const long n = pred.size();
  if (n == 0) return 0.0;
  return (pred - target).squaredNorm() / static_cast<double>(n);
}

Sample prepare_sample(const episode::EpisodeRecord& ep, const NormStats& stats) {
  const int n = static_cast<int>(ep.length());
  const int steps = std::max(0, n - 1);
  Sample s;
  s.inputs.resize(kInputDims, steps);
  s.targets.resize(kResponseDims, steps);
  VectorXd raw(kInputDims);
  for (int t = 0; t < steps; ++t) {
    raw.head(kResponseDims) = ep.follower_seq[t];
    raw[kResponseDims] = ep.command.time_cmd;
    raw[kResponseDims + 1] = ep.command.position_x;
    raw[kResponseDims + 2] = ep.command.position_y;
    s.inputs.col(t) = stats.normalize(raw);
    s.targets.col(t) = stats.normalize(VectorXd(ep.leader_seq[t + 1]));
  }
  return s;
}

// ---------------------------------------------------------------------------
// BPTT

SequenceGrad sequence_gradient(const LstmModel& model, const Sample& sample,
                               double feedback_prob, std::uint64_t feedback_seed) {
  const ModelConfig& cfg = model.config();
  const int h = cfg.hidden;
  const int L = cfg.layers;
  const int T = static_cast<int>(sample.inputs.cols());

  SequenceGrad out;
  out.grad = VectorXd::Zero(model.param_count());
  out.count = static_cast<long>(T) * cfg.output;
  if (T == 0) return out;

  // Forward with caches. The arithmetic mirrors LstmModel::step exactly.
  std::vector<MatrixXd> A(L), Hprev(L), Cprev(L), I(L), F(L), G(L), O(L), TanhC(L);
  for (int l = 0; l < L; ++l) {
    const int in = l == 0 ? cfg.input : h;
    A[l].resize(in, T);
    Hprev[l].resize(h, T);
    Cprev[l].resize(h, T);
    I[l].resize(h, T);
    F[l].resize(h, T);
    G[l].resize(h, T);
    O[l].resize(h, T);
    TanhC[l].resize(h, T);
  }
  MatrixXd Htop(h, T);
  MatrixXd preds(cfg.output, T);

  Rng coin(feedback_seed);
  LstmModel::Memory mem = model.zero_memory();
  VectorXd a(cfg.input), z(4 * h);
  for (int t = 0; t < T; ++t) {
    a = sample.inputs.col(t);
    if (feedback_prob > 0.0 && t > 0 && coin.uniform() < feedback_prob) {
      // Closed-loop training input: the previous prediction stands in for
      // the measured response dims; commands stay as given.
      a.head(kResponseDims) = preds.col(t - 1).head(kResponseDims);
    }
    VectorXd layer_in = a;
    for (int l = 0; l < L; ++l) {
      A[l].col(t) = layer_in;
      Hprev[l].col(t) = mem.h[l];
      Cprev[l].col(t) = mem.c[l];
      z.noalias() = model.wx(l) * layer_in;
      z.noalias() += model.wh(l) * mem.h[l];
      z += model.bias(l);
      for (int k = 0; k < h; ++k) {
        const double ig = sigmoid(z[k]);
        const double fg = sigmoid(z[h + k]);
        const double gg = std::tanh(z[2 * h + k]);
        const double og = sigmoid(z[3 * h + k]);
        mem.c[l][k] = fg * mem.c[l][k] + ig * gg;
        const double tc = std::tanh(mem.c[l][k]);
        mem.h[l][k] = og * tc;
        I[l](k, t) = ig;
        F[l](k, t) = fg;
        G[l](k, t) = gg;
        O[l](k, t) = og;
        TanhC[l](k, t) = tc;
      }
      layer_in = mem.h[l];
    }
    Htop.col(t) = layer_in;
    preds.col(t) = model.head_w() * layer_in;
    preds.col(t) += model.head_b();
    out.sq_sum += (preds.col(t) - sample.targets.col(t)).squaredNorm();
  }

  // Gradient views into the flat gradient vector via a scratch model layout.
  LstmModel gview(cfg);  // zero-initialized; reuse its offset layout
  gview.params() = std::move(out.grad);

  std::vector<VectorXd> dh(L, VectorXd::Zero(h)), dc(L, VectorXd::Zero(h));
  VectorXd dy(cfg.output), dz(4 * h);
  for (int t = T - 1; t >= 0; --t) {
    dy = 2.0 * (preds.col(t) - sample.targets.col(t));
    gview.head_w().noalias() += dy * Htop.col(t).transpose();
    gview.head_b() += dy;
    dh[L - 1].noalias() += model.head_w().transpose() * dy;
    for (int l = L - 1; l >= 0; --l) {
      for (int k = 0; k < h; ++k) {
        const double tc = TanhC[l](k, t);
        const double o = O[l](k, t);
        dc[l][k] += dh[l][k] * o * (1.0 - tc * tc);
        const double i = I[l](k, t);
        const double f = F[l](k, t);
        const double g = G[l](k, t);
        const double di = dc[l][k] * g;
        const double df = dc[l][k] * Cprev[l](k, t);
        const double dg = dc[l][k] * i;
        const double do_ = dh[l][k] * tc;
        dz[k] = di * i * (1.0 - i);
        dz[h + k] = df * f * (1.0 - f);
        dz[2 * h + k] = dg * (1.0 - g * g);
        dz[3 * h + k] = do_ * o * (1.0 - o);
        dc[l][k] *= f;  // carries to t-1
      }
      gview.wx(l).noalias() += dz * A[l].col(t).transpose();
      gview.wh(l).noalias() += dz * Hprev[l].col(t).transpose();
      gview.bias(l) += dz;
      if (l > 0) {
        dh[l - 1].noalias() += model.wx(l).transpose() * dz;
      }
      dh[l].noalias() = model.wh(l).transpose() * dz;
    }
  }

  out.grad = std::move(gview.params());
  return out;
}

// ---------------------------------------------------------------------------
// Batch kernels

namespace {
constexpr int kGradChunk = 8;  // fixed chunking keeps the reduction order
                               // independent of the thread count
}

BatchResult batch_gradient(const LstmModel& model, const std::vector<Sample>& samples,
                           const std::vector<int>& indices, double feedback_prob,
                           std::uint64_t seed, ExecutionPolicy policy) {
  const int n = static_cast<int>(indices.size());
  const int n_chunks = (n + kGradChunk - 1) / kGradChunk;
  std::vector<double> chunk_sq(n_chunks, 0.0);
  std::vector<long> chunk_count(n_chunks, 0);
  std::vector<VectorXd> chunk_grad(n_chunks);

  const bool par = policy == ExecutionPolicy::parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (int cidx = 0; cidx < n_chunks; ++cidx) {
    VectorXd acc = VectorXd::Zero(model.param_count());
    double sq = 0.0;
    long count = 0;
    const int lo = cidx * kGradChunk;
    const int hi = std::min(n, lo + kGradChunk);
    for (int i = lo; i < hi; ++i) {
      SequenceGrad g = sequence_gradient(model, samples[indices[i]], feedback_prob,
                                         derive_seed(seed, static_cast<std::uint64_t>(i)));
      acc += g.grad;
      sq += g.sq_sum;
      count += g.count;
    }
    chunk_sq[cidx] = sq;
    chunk_count[cidx] = count;
    chunk_grad[cidx] = std::move(acc);
  }

  BatchResult out;
  out.grad = VectorXd::Zero(model.param_count());
  double sq = 0.0;
  long count = 0;
  for (int c = 0; c < n_chunks; ++c) {
    out.grad += chunk_grad[c];
    sq += chunk_sq[c];
    count += chunk_count[c];
  }
  if (count > 0) {
    out.loss = sq / static_cast<double>(count);
    out.grad /= static_cast<double>(count);
  }
  return out;
}

double batch_loss(const LstmModel& model, const std::vector<Sample>& samples,
                  const std::vector<int>& indices, ExecutionPolicy policy) {
  const int n = static_cast<int>(indices.size());
  const int n_chunks = (n + kGradChunk - 1) / kGradChunk;
  std::vector<double> chunk_sq(n_chunks, 0.0);
  std::vector<long> chunk_count(n_chunks, 0);

  const bool par = policy == ExecutionPolicy::parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (int cidx = 0; cidx < n_chunks; ++cidx) {
    double sq = 0.0;
    long count = 0;
    const int lo = cidx * kGradChunk;
    const int hi = std::min(n, lo + kGradChunk);
    for (int i = lo; i < hi; ++i) {
      const Sample& s = samples[indices[i]];
      LstmModel::Memory mem = model.zero_memory();
      const MatrixXd pred = model.forward(s.inputs, mem);
      sq += (pred - s.targets).squaredNorm();
      count += s.targets.size();
    }
    chunk_sq[cidx] = sq;
    chunk_count[cidx] = count;
  }

  double sq = 0.0;
  long count = 0;
  for (int c = 0; c < n_chunks; ++c) {
    sq += chunk_sq[c];
    count += chunk_count[c];
  }
  return count > 0 ? sq / static_cast<double>(count) : 0.0;
}

// ---------------------------------------------------------------------------
// Adam

AdamState make_adam_state(int n) {
  AdamState s;
  s.m = VectorXd::Zero(n);
  s.v = VectorXd::Zero(n);
  return s;
}

void adam_step(VectorXd& params, const VectorXd& grad, AdamState& state,
               const AdamHyper& hyper) {
  if (params.size() != grad.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam shape mismatch");
  }
  state.step += 1;
  const double b1 = hyper.beta1, b2 = hyper.beta2;
  state.m = b1 * state.m + (1.0 - b1) * grad;
  state.v = b2 * state.v + (1.0 - b2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (int i = 0; i < params.size(); ++i) {
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps);
  }
}

// ---------------------------------------------------------------------------
// Training loop

TrainResult train(LstmModel& model, const std::vector<Sample>& train_samples,
                  const std::vector<Sample>& val_samples, const TrainConfig& cfg) {
  if (train_samples.empty()) throw std::invalid_argument("empty training dataset");

  TrainResult res;
  AdamState adam = make_adam_state(model.param_count());

  std::vector<int> order(train_samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::vector<int> val_idx(val_samples.size());
  for (std::size_t i = 0; i < val_idx.size(); ++i) val_idx[i] = static_cast<int>(i);

  Rng shuffle_rng(derive_seed(cfg.seed, 0x5f7e));
  std::size_t cursor = order.size();  // trigger shuffle on first use

  VectorXd best_params = model.params();
  res.best_val = std::numeric_limits<double>::infinity();

  auto evaluate = [&](int step) {
    if (val_idx.empty()) return;
    const double v = batch_loss(model, val_samples, val_idx, cfg.policy);
    res.val_loss.emplace_back(step, v);
    if (v < res.best_val) {
      res.best_val = v;
      res.best_step = step;
      best_params = model.params();
    }
  };

  for (int step = 0; step < cfg.max_steps; ++step) {
    std::vector<int> batch;
    batch.reserve(cfg.batch_size);
    for (int i = 0; i < cfg.batch_size; ++i) {
      if (cursor >= order.size()) {
        // Fisher-Yates with the deterministic stream.
        for (int j = static_cast<int>(order.size()) - 1; j > 0; --j) {
          std::swap(order[j], order[shuffle_rng.uniform_int(j + 1)]);
        }
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
    }

    const double ramp = cfg.feedback_ramp_steps > 0
                            ? std::min(1.0, static_cast<double>(step) /
                                                cfg.feedback_ramp_steps)
                            : 1.0;
    const double p = cfg.feedback_max * ramp;

    BatchResult b = batch_gradient(model, train_samples, batch, p,
                                   derive_seed(cfg.seed, 0xba7c4, step), cfg.policy);
    if (!std::isfinite(b.loss)) {
      throw std::runtime_error("non-finite training loss at step " + std::to_string(step));
    }
    adam_step(model.params(), b.grad, adam, cfg.adam);
    res.train_loss.push_back(b.loss);

    if (cfg.eval_interval > 0 && (step + 1) % cfg.eval_interval == 0) {
      evaluate(step + 1);
    }
  }
  if (res.val_loss.empty() || res.val_loss.back().first != cfg.max_steps) {
    evaluate(cfg.max_steps);
  }
  if (!val_idx.empty()) {
    model.params() = best_params;  // validation-selected weights
  }
  return res;
}

// ---------------------------------------------------------------------------
// Gradient check

double gradient_check(const LstmModel& model, const Sample& sample) {
  const SequenceGrad analytic = sequence_gradient(model, sample, 0.0, 0);
  LstmModel probe(model.config());
  probe.params() = model.params();

  auto eval = [&](void) {
    LstmModel::Memory mem = probe.zero_memory();
    const MatrixXd pred = probe.forward(sample.inputs, mem);
    return (pred - sample.targets).squaredNorm();
  };

  const double hstep = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < probe.param_count(); ++i) {
    const double save = probe.params()[i];
    probe.params()[i] = save + hstep;
    const double up = eval();
    probe.params()[i] = save - hstep;
    const double dn = eval();
    probe.params()[i] = save;
    const double numeric = (up - dn) / (2.0 * hstep);
    const double ga = analytic.grad[i];
    const double err = std::abs(ga - numeric) / (std::max(std::abs(ga), std::abs(numeric)) + 1e-8);
    worst = std::max(worst, err);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {
constexpr char kCkMagic[4] = {'S', 'S', 'M', 'D'};
constexpr std::uint32_t kCkVersion = 1;
}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  json header;
  header["model"] = {{"input", ck.config.input},
                     {"output", ck.config.output},
                     {"hidden", ck.config.hidden},
                     {"layers", ck.config.layers}};
  header["param_count"] = ck.params.size();
  header["stats_min"] = std::vector<double>(ck.stats.min.data(),
                                            ck.stats.min.data() + ck.stats.min.size());
  header["stats_max"] = std::vector<double>(ck.stats.max.data(),
                                            ck.stats.max.data() + ck.stats.max.size());
  header["round"] = ck.round_index;
  header["config_digest"] = ck.config_digest;
  const std::string hs = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(kCkMagic, 4);
  const std::uint32_t ver = kCkVersion;
  f.write(reinterpret_cast<const char*>(&ver), 4);
  const std::uint32_t hlen = static_cast<std::uint32_t>(hs.size());
  f.write(reinterpret_cast<const char*>(&hlen), 4);
  f.write(hs.data(), hlen);
  f.write(reinterpret_cast<const char*>(ck.params.data()),
          static_cast<std::streamsize>(sizeof(double) * ck.params.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  std::uint32_t ver = 0, hlen = 0;
  f.read(reinterpret_cast<char*>(&ver), 4);
  f.read(reinterpret_cast<char*>(&hlen), 4);
  if (!f || std::memcmp(magic, kCkMagic, 4) != 0 || ver != kCkVersion) {
    throw std::runtime_error("not a model checkpoint: " + path);
  }
  std::string hs(hlen, '\0');
  f.read(hs.data(), hlen);
  const json header = json::parse(hs);

  Checkpoint ck;
  ck.config.input = header.at("model").at("input").get<int>();
  ck.config.output = header.at("model").at("output").get<int>();
  ck.config.hidden = header.at("model").at("hidden").get<int>();
  ck.config.layers = header.at("model").at("layers").get<int>();
  const auto mins = header.at("stats_min").get<std::vector<double>>();
  const auto maxs = header.at("stats_max").get<std::vector<double>>();
  ck.stats.min = Eigen::Map<const VectorXd>(mins.data(), mins.size());
  ck.stats.max = Eigen::Map<const VectorXd>(maxs.data(), maxs.size());
  ck.round_index = header.at("round").get<int>();
  ck.config_digest = header.at("config_digest").get<std::string>();

  const long n = header.at("param_count").get<long>();
  ck.params.resize(n);
  f.read(reinterpret_cast<char*>(ck.params.data()),
         static_cast<std::streamsize>(sizeof(double) * n));
  if (!f) throw std::runtime_error("short read: " + path);
  return ck;
}

}  // namespace scoopsim::seqmodel
