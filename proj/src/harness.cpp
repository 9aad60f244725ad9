#include "alada/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "alada/alloc_audit.hpp"
#include "alada/errors.hpp"
#include "alada/theory.hpp"

namespace alada {

std::string_view to_string(ProblemKind k) noexcept {
  switch (k) {
    case ProblemKind::quadratic: return "quadratic";
    case ProblemKind::softmax: return "softmax";
    case ProblemKind::mlp: return "mlp";
  }
  return "unknown";
}

std::optional<ProblemKind> parse_problem(std::string_view name) noexcept {
  for (ProblemKind k : {ProblemKind::quadratic, ProblemKind::softmax, ProblemKind::mlp}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (m == 0) throw ConfigError("m", "must be positive");
  if (n == 0) throw ConfigError("n", "must be positive");
  if (steps == 0) throw ConfigError("steps", "must be at least 1");
  if (!(noise_bound >= 0.0)) throw ConfigError("noise-bound", "must be non-negative");
  if (batch_size == 0) throw ConfigError("batch-size", "must be positive");
  if (problem == ProblemKind::softmax && m < 2) throw ConfigError("m", "softmax regression needs at least 2 classes");
  if (problem != ProblemKind::quadratic && dataset_size == 0) throw ConfigError("dataset-size", "must be positive");
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("hidden", "layer sizes must be positive");
  }
  effective_optimizer_config().validate();
}

OptimizerConfig ExperimentConfig::effective_optimizer_config() const {
  OptimizerConfig cfg = opt;
  cfg.horizon = steps;
  if (map_adam_betas) {
    const BetaPair mapped = alada::map_adam_betas(cfg.beta1, cfg.beta2);
    cfg.beta1 = mapped.beta1;
    cfg.beta2 = mapped.beta2;
  }
  return cfg;
}

std::unique_ptr<Problem> make_problem(const ExperimentConfig& cfg) {
  switch (cfg.problem) {
    case ProblemKind::quadratic:
      return std::make_unique<QuadraticProblem>(QuadraticProblem::random(cfg.m, cfg.n, cfg.noise_bound, cfg.seed));
    case ProblemKind::softmax:
      return std::make_unique<SoftmaxRegressionProblem>(
          make_classification_data(cfg.m, cfg.n, cfg.dataset_size, cfg.planted_scale, cfg.seed), cfg.batch_size);
    case ProblemKind::mlp: {
      std::vector<std::size_t> sizes{cfg.n};
      sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
      sizes.push_back(cfg.m);
      RegressionData data = make_teacher_data(sizes, cfg.dataset_size, cfg.seed);
      return std::make_unique<MlpProblem>(sizes, std::move(data), Activation::tanh, cfg.batch_size,
                                          cfg.seed ^ 0x5bd1e995ULL);
    }
  }
  throw ConfigError("problem", "unknown kind");
}

std::uint64_t sampler_seed(std::uint64_t seed) noexcept {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RunResult run_experiment(const Problem& problem, OptimizerKind kind, const OptimizerConfig& cfg, std::size_t steps,
                         std::uint64_t seed) {
  OptimizerConfig run_cfg = cfg;
  run_cfg.horizon = steps;
  run_cfg.validate();

  const std::size_t count = problem.num_params();
  std::vector<Matrix> params = problem.initial_params();
  std::vector<Matrix> bufs = problem.zero_buffers();
  std::vector<std::unique_ptr<Optimizer>> opts;
  std::size_t state_scalars = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const auto [m, n] = problem.param_dims(k);
    opts.push_back(make_optimizer(kind, run_cfg, m, n));
    state_scalars += opts.back()->state_scalars();
  }

  RunResult result;
  result.trace.reserve(steps);
  RunSummary& summary = result.summary;
  summary.optimizer = std::string(to_string(kind));
  summary.problem = problem.name();
  summary.steps = steps;
  summary.state_scalars = state_scalars;
  summary.config = run_cfg;
  summary.min_grad_norm = std::numeric_limits<double>::infinity();

  Rng rng(seed);
  std::vector<double> decays(count, 0.0);
  double loss_sum = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t t = 0; t < steps; ++t) {
    const Sample sample = problem.draw(rng);
    for (std::size_t k = 0; k < count; ++k) decays[k] = opts[k]->grad_decay(t);
    const GradEval eval = problem.accumulate_gradients(params, sample, bufs, decays);
    if (!std::isfinite(eval.loss)) throw NanLossError(t);

    for (std::size_t k = 0; k < count; ++k) {
      AllocationAudit audit(params[k].size());
      opts[k]->step(params[k], bufs[k], t);
      summary.large_transient_allocations += audit.large_allocations();
      summary.peak_transient_scalars = std::max(summary.peak_transient_scalars, audit.peak_scalars());
    }

    loss_sum += eval.loss;
    const double grad_norm = std::sqrt(eval.grad_sq_norm);
    summary.min_grad_norm = std::min(summary.min_grad_norm, grad_norm);
    result.trace.push_back({t, eval.loss, loss_sum / static_cast<double>(t + 1), grad_norm, run_cfg.step_size(t),
                            state_scalars});
  }
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  summary.final_loss = result.trace.back().loss;
  summary.final_cum_avg_loss = result.trace.back().cum_avg_loss;
  summary.final_full_loss = problem.full_loss(params);
  summary.final_full_grad_norm = std::sqrt(problem.full_grad_sq_norm(params));
  summary.wall_seconds_per_step = elapsed / static_cast<double>(steps);
  result.final_params = std::move(params);
  return result;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto problem = make_problem(cfg);
  return run_experiment(*problem, cfg.optimizer, cfg.effective_optimizer_config(), cfg.steps, sampler_seed(cfg.seed));
}

namespace {

void put_real(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : trace) {
    out << r.step << ',';
    put_real(out, r.loss);
    out << ',';
    put_real(out, r.cum_avg_loss);
    out << ',';
    put_real(out, r.grad_fro_norm);
    out << ',';
    put_real(out, r.step_size);
    out << ',' << r.state_scalars << '\n';
  }
}

nlohmann::json to_json(const RunSummary& s) {
  return {
      {"optimizer", s.optimizer},
      {"problem", s.problem},
      {"steps", s.steps},
      {"final_loss", s.final_loss},
      {"final_cum_avg_loss", s.final_cum_avg_loss},
      {"min_grad_norm", s.min_grad_norm},
      {"final_full_loss", s.final_full_loss},
      {"final_full_grad_norm", s.final_full_grad_norm},
      {"state_scalars", s.state_scalars},
      {"peak_transient_scalars", s.peak_transient_scalars},
      {"large_transient_allocations", s.large_transient_allocations},
      {"wall_seconds_per_step", s.wall_seconds_per_step},
      {"config",
       {{"beta1", s.config.beta1},
        {"beta2", s.config.beta2},
        {"eps", s.config.eps},
        {"lr", s.config.eta0},
        {"schedule", std::string(to_string(s.config.schedule))},
        {"eps_placement", s.config.eps_placement == EpsPlacement::inside_sqrt ? "inside_sqrt" : "outside_sqrt"}}},
  };
}

BoundReport bound_check(const Problem& problem, const OptimizerConfig& cfg, std::size_t steps,
                        const std::vector<std::uint64_t>& seeds) {
  const auto constants = problem.constants();
  if (!constants) {
    throw ConfigError("problem", problem.name() +
                                     " has no known smoothness, gradient bound and lower bound; "
                                     "bound-check needs a problem that satisfies the theorem's assumptions");
  }
  if (problem.num_params() != 1) throw ConfigError("problem", "bound-check runs on a single matrix parameter");
  if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");

  OptimizerConfig run_cfg = cfg;
  run_cfg.schedule = Schedule::theorem;
  run_cfg.horizon = steps;
  run_cfg.validate();

  const auto [m, n] = problem.param_dims(0);
  BoundReport report;
  report.grad_bound_assumed = constants->grad_bound;
  for (std::uint64_t seed : seeds) {
    Matrix x = problem.initial_params().front();
    Matrix buf(m, n);
    AladaState state;
    Rng rng(sampler_seed(seed));
    double acc = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
      const std::span<const Matrix> view(&x, 1);
      acc += problem.full_grad_sq_norm(view);
      if (const auto g = problem.grad_inf_bound_at(view)) {
        report.grad_bound_observed = std::max(report.grad_bound_observed, *g);
      }
      const Sample sample = problem.draw(rng);
      const double loss = problem.accumulate_grad(x, sample, buf, t == 0 ? 0.0 : run_cfg.beta1).loss;
      if (!std::isfinite(loss)) throw NanLossError(t);
      alada_step(x, buf, state, run_cfg, t);
    }
    report.lhs_per_seed.push_back(acc / static_cast<double>(steps));
  }
  double total = 0.0;
  for (double v : report.lhs_per_seed) total += v;
  report.lhs_mean = total / static_cast<double>(seeds.size());

  report.assumption_held = report.grad_bound_observed <= report.grad_bound_assumed;
  const double g = std::max(report.grad_bound_assumed, report.grad_bound_observed);
  const Matrix x0 = problem.initial_params().front();
  const TheoryParams params{constants->smoothness, g, constants->lower_bound,
                            problem.full_loss(std::span<const Matrix>(&x0, 1)) - constants->lower_bound};
  report.gamma = bound_gamma(m, n, g, run_cfg.eps, run_cfg.beta2);
  report.phi = bound_phi(m, n, g, params.smoothness, run_cfg.eps, run_cfg.eta0, run_cfg.beta1, steps);
  report.rhs = theorem_bound(params, run_cfg.beta1, run_cfg.beta2, run_cfg.eps, run_cfg.eta0, steps, m, n);
  report.within_bound = report.lhs_mean <= report.rhs;
  return report;
}

nlohmann::json to_json(const BoundReport& r) {
  return {
      {"lhs_per_seed", r.lhs_per_seed},
      {"lhs_mean", r.lhs_mean},
      {"rhs", r.rhs},
      {"gamma", r.gamma},
      {"phi", r.phi},
      {"grad_bound_assumed", r.grad_bound_assumed},
      {"grad_bound_observed", r.grad_bound_observed},
      {"assumption_held", r.assumption_held},
      {"within_bound", r.within_bound},
  };
}

EtaTuning tune_eta(const ExperimentConfig& base, const std::vector<double>& etas,
                   const std::vector<std::uint64_t>& seeds) {
  if (etas.empty()) throw ConfigError("eta-set", "at least one step size is required");
  if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  EtaTuning out;
  out.etas = etas;
  out.best_mean = std::numeric_limits<double>::infinity();
  out.best_eta = etas.front();
  for (double eta : etas) {
    double total = 0.0;
    for (std::uint64_t seed : seeds) {
      ExperimentConfig cfg = base;
      cfg.opt.eta0 = eta;
      cfg.seed = seed;
      try {
        total += run_experiment(cfg).summary.final_cum_avg_loss;
      } catch (const NanLossError&) {
        total = std::numeric_limits<double>::infinity();
      }
    }
    const double mean = total / static_cast<double>(seeds.size());
    out.mean_final_cum_avg_loss.push_back(mean);
    if (mean < out.best_mean) {
      out.best_mean = mean;
      out.best_eta = eta;
    }
  }
  return out;
}

std::vector<SweepCell> sweep_betas(const ExperimentConfig& base, const std::vector<double>& beta1_set,
                                   const std::vector<double>& beta2_set, const std::vector<double>& eta_set,
                                   const std::vector<std::uint64_t>& seeds) {
  std::vector<SweepCell> cells;
  for (double b1 : beta1_set) {
    for (double b2 : beta2_set) {
      ExperimentConfig cfg = base;
      cfg.opt.beta1 = b1;
      cfg.opt.beta2 = b2;
      cfg.map_adam_betas = false;
      cells.push_back({b1, b2, tune_eta(cfg, eta_set, seeds)});
    }
  }
  return cells;
}

nlohmann::json to_json(const std::vector<SweepCell>& cells) {
  nlohmann::json out = nlohmann::json::array();
  for (const SweepCell& c : cells) {
    nlohmann::json per_eta = nlohmann::json::array();
    for (std::size_t k = 0; k < c.tuning.etas.size(); ++k) {
      const double v = c.tuning.mean_final_cum_avg_loss[k];
      per_eta.push_back({{"lr", c.tuning.etas[k]}, {"mean_final_cum_avg_loss", std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr)}});
    }
    out.push_back({{"beta1", c.beta1},
                   {"beta2", c.beta2},
                   {"best_lr", c.tuning.best_eta},
                   {"best_mean_final_cum_avg_loss",
                    std::isfinite(c.tuning.best_mean) ? nlohmann::json(c.tuning.best_mean) : nlohmann::json(nullptr)},
                   {"per_lr", per_eta}});
  }
  return out;
}

}  // namespace alada
