#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scoopsim/episode.hpp"
#include "scoopsim/types.hpp"

namespace scoopsim::seqmodel {

inline constexpr int kResponseDims = 24;
inline constexpr int kCommandDims = 3;  // time command, position x, y
inline constexpr int kInputDims = kResponseDims + kCommandDims;

enum class ExecutionPolicy { serial, parallel };

// Per-dimension max-min normalization. Response dims come from the training
// split; the command dims are pinned to the configured command ranges. Stats
// are stored with the model and never recomputed during fine-tuning.
struct NormStats {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;
  Eigen::VectorXd denormalize(const Eigen::VectorXd& x) const;
};

struct ModelConfig {
  int input = kInputDims;
  int output = kResponseDims;
  int hidden = 64;
  int layers = 2;

  bool operator==(const ModelConfig&) const = default;
};

// Gated recurrent stack (input/forget/output gates plus cell candidate) with
// a linear head. Parameters live in one flat vector; layer weights are
// Eigen maps into it, so the optimizer and the serializer see a single
// contiguous array.
class LstmModel {
 public:
  explicit LstmModel(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  int param_count() const { return static_cast<int>(params_.size()); }

  void init_random(Rng& rng);

  struct Memory {
    std::vector<Eigen::VectorXd> h;
    std::vector<Eigen::VectorXd> c;
  };
  Memory zero_memory() const;

  // One inference step; memory is threaded explicitly so rollouts stream.
  Eigen::VectorXd step(const Eigen::VectorXd& input, Memory& mem) const;

  // Whole-sequence forward; implemented as repeated step() calls so the
  // streaming and batch paths are the same arithmetic.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs, Memory& mem) const;

  // Weight views (4H x in), (4H x H), (4H), head (out x H), (out).
  Eigen::Map<Eigen::MatrixXd> wx(int layer);
  Eigen::Map<Eigen::MatrixXd> wh(int layer);
  Eigen::Map<Eigen::VectorXd> bias(int layer);
  Eigen::Map<Eigen::MatrixXd> head_w();
  Eigen::Map<Eigen::VectorXd> head_b();
  Eigen::Map<const Eigen::MatrixXd> wx(int layer) const;
  Eigen::Map<const Eigen::MatrixXd> wh(int layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
  Eigen::Map<const Eigen::MatrixXd> head_w() const;
  Eigen::Map<const Eigen::VectorXd> head_b() const;

 private:
  ModelConfig cfg_;
  Eigen::VectorXd params_;
  struct Offsets {
    int wx, wh, b;
  };
  std::vector<Offsets> layer_off_;
  int head_w_off_ = 0;
  int head_b_off_ = 0;

  int layer_input(int layer) const { return layer == 0 ? cfg_.input : cfg_.hidden; }
};

// Mean over steps and dims of the squared error.
double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

// One normalized training sequence: inputs pair with the next-step targets.
struct Sample {
  Eigen::MatrixXd inputs;   // input_dims x T
  Eigen::MatrixXd targets;  // output_dims x T
};

Sample prepare_sample(const episode::EpisodeRecord& ep, const NormStats& stats);

// Squared-error sum and gradient of one sequence. With feedback_prob > 0 the
// model's previous prediction replaces the response dims of the next input
// (scheduled sampling); fed-back values are treated as constants by the
// backward pass, so gradients assume teacher forcing along that path.
struct SequenceGrad {
  double sq_sum = 0.0;
  long count = 0;
  Eigen::VectorXd grad;
};

SequenceGrad sequence_gradient(const LstmModel& model, const Sample& sample,
                               double feedback_prob, std::uint64_t feedback_seed);

struct BatchResult {
  double loss = 0.0;  // sq_sum / count
  Eigen::VectorXd grad;
};

// Batch gradient over the indexed samples. Episodes are processed in fixed
// chunks and reduced in chunk order, so the serial and OpenMP paths produce
// bit-identical results for any thread count.
BatchResult batch_gradient(const LstmModel& model, const std::vector<Sample>& samples,
                           const std::vector<int>& indices, double feedback_prob,
                           std::uint64_t seed, ExecutionPolicy policy);

// Teacher-forced loss only (validation).
double batch_loss(const LstmModel& model, const std::vector<Sample>& samples,
                  const std::vector<int>& indices, ExecutionPolicy policy);

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
};

AdamState make_adam_state(int n);

// Bias-corrected moment update in place.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               AdamState& state, const AdamHyper& hyper);

struct TrainConfig {
  int batch_size = 16;
  int max_steps = 600;
  int eval_interval = 25;
  AdamHyper adam;
  double feedback_max = 0.5;   // scheduled-sampling ceiling
  int feedback_ramp_steps = 300;
  std::uint64_t seed = 1;
  ExecutionPolicy policy = ExecutionPolicy::parallel;
};

struct TrainResult {
  std::vector<double> train_loss;                 // one entry per step
  std::vector<std::pair<int, double>> val_loss;   // (step, loss)
  int best_step = 0;
  double best_val = 0.0;
};

// Minimizes next-step prediction error; the returned model carries the
// parameters of the best validation evaluation. Throws on an empty dataset
// or a non-finite loss.
TrainResult train(LstmModel& model, const std::vector<Sample>& train_samples,
                  const std::vector<Sample>& val_samples, const TrainConfig& cfg);

// Worst relative error between analytic gradients and central finite
// differences (h = 1e-5), teacher-forced.
double gradient_check(const LstmModel& model, const Sample& sample);

// Model checkpoint: versioned binary header + flat weights + NormStats.
struct Checkpoint {
  ModelConfig config;
  Eigen::VectorXd params;
  NormStats stats;
  int round_index = 0;
  std::string config_digest;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace scoopsim::seqmodel
