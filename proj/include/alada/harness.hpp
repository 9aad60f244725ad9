#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "alada/optimizers.hpp"
#include "alada/problems.hpp"

namespace alada {

enum class ProblemKind { quadratic, softmax, mlp };

std::string_view to_string(ProblemKind k) noexcept;
std::optional<ProblemKind> parse_problem(std::string_view name) noexcept;

struct ExperimentConfig {
  OptimizerKind optimizer = OptimizerKind::alada;
  ProblemKind problem = ProblemKind::quadratic;
  std::size_t m = 20;
  std::size_t n = 10;
  std::size_t steps = 1000;
  /// eta0, betas, eps and schedule; the horizon is always `steps`.
  OptimizerConfig opt = OptimizerConfig::defaults_for(OptimizerKind::alada);
  std::uint64_t seed = 0;
  double noise_bound = 0.0;
  std::size_t batch_size = 1;
  std::size_t dataset_size = 2000;
  double planted_scale = 1.0;
  std::vector<std::size_t> hidden = {16};
  bool map_adam_betas = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// The optimizer settings actually used: horizon = steps, Adam betas mapped if requested.
  OptimizerConfig effective_optimizer_config() const;
};

/// Builds the configured problem. Problem data is drawn from `seed`.
std::unique_ptr<Problem> make_problem(const ExperimentConfig& cfg);

/// Sampler seed derived from the experiment seed, decorrelated from the data seed.
std::uint64_t sampler_seed(std::uint64_t seed) noexcept;

struct TraceRecord {
  std::size_t step;
  double loss;          ///< minibatch loss at X_t, before the step
  double cum_avg_loss;  ///< mean of loss over steps 0..step
  double grad_fro_norm; ///< |grad F(X_t; xi_t)|_F
  double step_size;
  std::size_t state_scalars;
};

struct RunSummary {
  std::string optimizer;
  std::string problem;
  std::size_t steps = 0;
  double final_loss = 0.0;
  double final_cum_avg_loss = 0.0;
  double min_grad_norm = 0.0;
  double final_full_loss = 0.0;       ///< f(X_T) over the whole sampling distribution
  double final_full_grad_norm = 0.0;
  std::size_t state_scalars = 0;
  /// Largest single buffer the optimizer allocated during any step, in scalars.
  std::size_t peak_transient_scalars = 0;
  /// Optimizer-internal allocations of at least m*n scalars, summed over the run.
  std::size_t large_transient_allocations = 0;
  double wall_seconds_per_step = 0.0;
  OptimizerConfig config;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  RunSummary summary;
  std::vector<Matrix> final_params;
};

/// Seeded training loop: draw xi_t, fuse-accumulate the gradient into the gradient slot with
/// the optimizer's decay, step, record. Throws NanLossError on a non-finite loss.
RunResult run_experiment(const Problem& problem, OptimizerKind kind, const OptimizerConfig& cfg, std::size_t steps,
                         std::uint64_t sampler_seed);
RunResult run_experiment(const ExperimentConfig& cfg);

inline constexpr std::string_view kTraceHeader = "step,loss,cum_avg_loss,grad_fro_norm,step_size,state_scalars";

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);
nlohmann::json to_json(const RunSummary& summary);

struct BoundReport {
  std::vector<double> lhs_per_seed;  ///< (1/T) sum_t |grad f(X_t)|^2, one run per seed
  double lhs_mean = 0.0;
  double rhs = 0.0;
  double gamma = 0.0;
  double phi = 0.0;
  double grad_bound_assumed = 0.0;
  double grad_bound_observed = 0.0;  ///< largest l-infinity gradient bound along every trajectory
  bool assumption_held = true;
  bool within_bound = true;
};

/// Runs Alada with eta_t = eta (1 - beta1^(t+1)) and compares the seed-averaged mean squared
/// true-gradient norm with the theorem's right-hand side. The bound is evaluated with
/// G = max(assumed, observed). ConfigError if the problem has no known constants.
BoundReport bound_check(const Problem& problem, const OptimizerConfig& cfg, std::size_t steps,
                        const std::vector<std::uint64_t>& seeds);
nlohmann::json to_json(const BoundReport& report);

struct EtaTuning {
  std::vector<double> etas;
  std::vector<double> mean_final_cum_avg_loss;  ///< +inf where any seed diverged
  double best_eta = 0.0;
  double best_mean = 0.0;
};

/// Mean final cum_avg_loss over seeds for each eta; picks the best.
EtaTuning tune_eta(const ExperimentConfig& base, const std::vector<double>& etas,
                   const std::vector<std::uint64_t>& seeds);

struct SweepCell {
  double beta1;
  double beta2;
  EtaTuning tuning;
};

std::vector<SweepCell> sweep_betas(const ExperimentConfig& base, const std::vector<double>& beta1_set,
                                   const std::vector<double>& beta2_set, const std::vector<double>& eta_set,
                                   const std::vector<std::uint64_t>& seeds);
nlohmann::json to_json(const std::vector<SweepCell>& cells);

}  // namespace alada
