// Compares the serial reference paths against the OpenMP kernels on the two
// hot loops: batch gradient evaluation and grid rollouts.

#include <cstdio>
#include <vector>

#include <omp.h>

#include "scoopsim/pipeline.hpp"
#include "scoopsim/run_config.hpp"

using namespace scoopsim;

namespace {

std::vector<seqmodel::Sample> synthetic_samples(const seqmodel::ModelConfig& mc,
                                                int count, int steps,
                                                std::uint64_t seed) {
  std::vector<seqmodel::Sample> out;
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    seqmodel::Sample s;
    s.inputs.resize(mc.input, steps);
    s.targets.resize(mc.output, steps);
    for (int t = 0; t < steps; ++t) {
      for (int d = 0; d < mc.input; ++d) s.inputs(d, t) = rng.uniform();
      for (int d = 0; d < mc.output; ++d) s.targets(d, t) = rng.uniform();
    }
    out.push_back(std::move(s));
  }
  return out;
}

double time_batch(const seqmodel::LstmModel& model,
                  const std::vector<seqmodel::Sample>& samples,
                  seqmodel::ExecutionPolicy policy, int reps) {
  std::vector<int> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  const double t0 = omp_get_wtime();
  double sink = 0.0;
  for (int r = 0; r < reps; ++r) {
    sink += seqmodel::batch_gradient(model, samples, idx, 0.0, 7, policy).loss;
  }
  const double dt = (omp_get_wtime() - t0) / reps;
  std::printf("  (loss checksum %.12g)\n", sink);
  return dt;
}

double time_grid(const seqmodel::LstmModel& model, const seqmodel::NormStats& stats,
                 pipeline::Config cfg, seqmodel::ExecutionPolicy policy) {
  cfg.policy = policy;
  const double t0 = omp_get_wtime();
  const pipeline::Report rep = pipeline::evaluate(model, stats, 0, cfg);
  const double dt = omp_get_wtime() - t0;
  std::printf("  (%d/%d successes)\n", rep.successes(), rep.total());
  return dt;
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", omp_get_max_threads());

  config::RunConfig cfg = config::default_run_config();
  seqmodel::LstmModel model(cfg.pipe.model);
  Rng rng(42);
  model.init_random(rng);

  std::printf("batch gradient: 16 sequences x 300 steps, %d params\n",
              model.param_count());
  const auto samples = synthetic_samples(cfg.pipe.model, 16, 300, 11);
  const double gs = time_batch(model, samples, seqmodel::ExecutionPolicy::serial, 3);
  const double gp = time_batch(model, samples, seqmodel::ExecutionPolicy::parallel, 3);
  std::printf("  serial   %8.3f s/step\n", gs);
  std::printf("  parallel %8.3f s/step   speedup %.2fx\n\n", gp, gs / gp);

  // A small grid keeps the benchmark quick; rates scale linearly in trials.
  cfg.pipe.grid.times = {4, 8, 12};
  cfg.pipe.grid.masses = {0.030};
  cfg.pipe.grid.trials_per_cell = 1;
  seqmodel::NormStats stats;
  stats.min = Eigen::VectorXd::Constant(seqmodel::kInputDims, -1.0);
  stats.max = Eigen::VectorXd::Constant(seqmodel::kInputDims, 1.0);
  std::printf("grid rollouts: %d trials (untrained model)\n",
              cfg.pipe.grid.total_trials());
  const double es = time_grid(model, stats, cfg.pipe, seqmodel::ExecutionPolicy::serial);
  const double ep = time_grid(model, stats, cfg.pipe, seqmodel::ExecutionPolicy::parallel);
  std::printf("  serial   %8.3f s\n", es);
  std::printf("  parallel %8.3f s   speedup %.2fx\n", ep, es / ep);
  return 0;
}
