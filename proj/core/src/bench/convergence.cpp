#include "saabo/bench/convergence.hpp"

#include "saabo/bench/test_functions.hpp"
#include "saabo/errors.hpp"
#include "saabo/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace saabo::bench {

std::string to_string(ConvergenceOptimizer opt) {
  return opt == ConvergenceOptimizer::saa ? "saa" : "resample_adam";
}

ConvergenceOptimizer parse_convergence_optimizer(const std::string& name) {
  if (name == "saa") return ConvergenceOptimizer::saa;
  if (name == "resample_adam") return ConvergenceOptimizer::resample_adam;
  throw ConfigError("unknown convergence optimizer '" + name + "' (expected saa or resample_adam)");
}

std::vector<long long> ConvergenceConfig::effective_sizes() const {
  std::vector<long long> out;
  for (long long n : sizes.empty() ? qmc_sample_sizes(schedule) : sizes) {
    if (n >= min_size) out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void ConvergenceConfig::validate() const {
  for (long long n : sizes) {
    if (n < 1) throw ConfigError("convergence sizes must be ≥ 1");
  }
  if (effective_sizes().empty()) throw ConfigError("convergence study needs at least one sample size");
  if (modes.empty()) throw ConfigError("convergence study needs at least one sampler mode");
  if (optimizers.empty()) throw ConfigError("convergence study needs at least one optimizer");
  if (replications < 2) throw ConfigError("replications must be ≥ 2");
  if (fixture_points < 2) throw ConfigError("fixture_points must be ≥ 2");
  if (num_restarts < 1 || raw_samples < num_restarts) throw ConfigError("need 1 ≤ num_restarts ≤ raw_samples");
  if (maxiter < 1 || adam_steps < 1) throw ConfigError("iteration counts must be ≥ 1");
  if (!(adam_lr > 0.0)) throw ConfigError("adam_lr must be positive");
}

EiFixture make_ei_fixture(std::shared_ptr<const ModelList> model, const Bounds& bounds, double best_f,
                          std::uint64_t seed) {
  if (model->num_outputs() != 1) throw ShapeError("make_ei_fixture: model must have one output");
  BatchObjective f;
  f.rows = 1;
  f.dim = model->dim();
  f.evaluate = [model, best_f](const MatrixXd& x) { return analytic_ei(*model, x, best_f); };
  f.value = [model, best_f](const MatrixXd& x) { return analytic_ei(*model, x, best_f).value; };
  OptimizeConfig oc;
  oc.bounds = bounds;
  oc.q = 1;
  oc.raw_samples = 8192;
  oc.num_restarts = 64;
  oc.maxiter = 2000;
  oc.grad_tol = 1e-12;
  oc.ftol = 0.0;
  const CandidateResult r = optimize_acqf(f, oc, seed);
  EiFixture fx;
  fx.model = std::move(model);
  fx.bounds = bounds;
  fx.best_f = best_f;
  fx.x_star = r.X_star;
  fx.ei_star = r.value;
  return fx;
}

EiFixture make_hartmann6_fixture(std::uint64_t seed, Eigen::Index n) {
  const TestFunction fn = make_test_function("hartmann6");
  MatrixXd X(n, fn.dim);
  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < fn.dim; ++k) {
      X(i, k) = hash_uniform(derive_seed(seed, 0x78ULL), static_cast<std::uint64_t>(i * fn.dim + k));
    }
    y(i) = -eval_test_function(fn, X.row(i).transpose(), false, nullptr);
  }
  FitConfig fc;
  fc.seed = derive_seed(seed, 0x666974ULL);
  fc.input_bounds = fn.bounds;
  auto model = std::make_shared<const ModelList>(std::vector<GPModel>{fit_mle(Dataset(X, y), fc)});
  return make_ei_fixture(model, fn.bounds, y.maxCoeff(), derive_seed(seed, 0x6f7074ULL));
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

namespace {

AcquisitionFunction make_qei(const EiFixture& fx, BaseSampleSet samples) {
  AcquisitionContext ctx;
  ctx.model = fx.model;
  ctx.objective = ObjectiveSpec::identity();
  ctx.base_samples = std::move(samples);
  ctx.params.best_f = fx.best_f;
  return AcquisitionFunction(AcquisitionKind::qei, std::move(ctx), 1);
}

OptimizeConfig optimizer_config(const EiFixture& fx, const ConvergenceConfig& cfg) {
  OptimizeConfig oc;
  oc.bounds = fx.bounds;
  oc.q = 1;
  oc.raw_samples = cfg.raw_samples;
  oc.num_restarts = cfg.num_restarts;
  oc.eta = cfg.eta;
  oc.maxiter = cfg.maxiter;
  oc.grad_tol = cfg.grad_tol;
  oc.ftol = 0.0;
  return oc;
}

MatrixXd solve_saa(const EiFixture& fx, const ConvergenceConfig& cfg, SampleMode mode, long long N,
                   std::uint64_t seed) {
  const AcquisitionFunction acqf = make_qei(fx, draw_base_samples(mode, derive_seed(seed, 0x45ULL), N, 1));
  return optimize_acqf(acqf, optimizer_config(fx, cfg), derive_seed(seed, 0x53ULL)).X_star;
}

// Adam ascent with base samples redrawn at every step; the same
// initialization heuristic supplies the starts.
MatrixXd solve_adam(const EiFixture& fx, const ConvergenceConfig& cfg, SampleMode mode, long long N,
                    std::uint64_t seed) {
  const OptimizeConfig oc = optimizer_config(fx, cfg);
  const AcquisitionFunction init = make_qei(fx, draw_base_samples(mode, derive_seed(seed, 0x45ULL), N, 1));
  const std::vector<MatrixXd> starts = gen_initial_conditions(init, oc, derive_seed(seed, 0x53ULL));
  const VectorXd range = fx.bounds.range();
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::uint64_t step_id = 0;
  MatrixXd best;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < starts.size(); ++r) {
    MatrixXd x = starts[r];
    MatrixXd m = MatrixXd::Zero(x.rows(), x.cols()), v = m;
    for (int t = 1; t <= cfg.adam_steps; ++t) {
      const AcquisitionFunction a =
          make_qei(fx, draw_base_samples(mode, derive_seed(seed, 0x1000ULL + step_id++), N, 1));
      const MatrixXd g = a.evaluate(x).grad;
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        x(0, k) += cfg.adam_lr * range(k) * (m(0, k) / c1) / (std::sqrt(v(0, k) / c2) + eps);
      }
      x = fx.bounds.project(x);
    }
    const AcquisitionFunction judge =
        make_qei(fx, draw_base_samples(mode, derive_seed(seed, 0x1000ULL + step_id++), N, 1));
    const double val = judge.value(x);
    if (val > best_val) {
      best_val = val;
      best = x;
    }
  }
  return best;
}

void mean_var(const std::vector<double>& v, double& mean, double& var) {
  mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  var = 0.0;
  for (double e : v) var += (e - mean) * (e - mean);
  var /= static_cast<double>(v.size() - 1);
}

}  // namespace

ConvergenceResult run_convergence_study(const EiFixture& fx, const ConvergenceConfig& cfg) {
  cfg.validate();
  if (fx.model->num_outputs() != 1) throw ShapeError("run_convergence_study: fixture must have one output");
  if (!(fx.ei_star > 0.0)) throw ConfigError("run_convergence_study: analytic EI maximum is not positive");
  const std::vector<long long> sizes = cfg.effective_sizes();
  ConvergenceResult res;
  for (ConvergenceOptimizer opt : cfg.optimizers) {
    for (SampleMode mode : cfg.modes) {
      std::vector<double> ns, mg, vg, md, vd;
      for (long long N : sizes) {
        std::vector<double> gaps, dists;
        for (int rep = 0; rep < cfg.replications; ++rep) {
          const std::uint64_t s = derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(N)),
                                              static_cast<std::uint64_t>(rep));
          const MatrixXd x = opt == ConvergenceOptimizer::saa ? solve_saa(fx, cfg, mode, N, s)
                                                              : solve_adam(fx, cfg, mode, N, s);
          gaps.push_back(1.0 - analytic_ei(*fx.model, x, fx.best_f).value / fx.ei_star);
          dists.push_back((x - fx.x_star).norm());
        }
        ConvergenceRow row;
        row.N = N;
        row.mode = mode;
        row.optimizer = opt;
        mean_var(gaps, row.mean_gap, row.var_gap);
        mean_var(dists, row.mean_dist, row.var_dist);
        res.rows.push_back(row);
        ns.push_back(static_cast<double>(N));
        mg.push_back(row.mean_gap);
        vg.push_back(row.var_gap);
        md.push_back(row.mean_dist);
        vd.push_back(row.var_dist);
      }
      res.slopes.push_back({mode, opt, log_log_slope(ns, mg), log_log_slope(ns, vg), log_log_slope(ns, md),
                            log_log_slope(ns, vd)});
    }
  }
  return res;
}

ConvergenceResult run_convergence_study(const ConvergenceConfig& config) {
  config.validate();
  return run_convergence_study(make_hartmann6_fixture(config.fixture_seed, config.fixture_points), config);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_convergence_csv(std::ostream& out, const ConvergenceResult& result) {
  out << "N,mode,optimizer,mean_gap,var_gap,mean_dist,var_dist\n";
  for (const auto& r : result.rows) {
    out << r.N << ',' << to_string(r.mode) << ',' << to_string(r.optimizer) << ',' << fmt(r.mean_gap) << ','
        << fmt(r.var_gap) << ',' << fmt(r.mean_dist) << ',' << fmt(r.var_dist) << '\n';
  }
  for (const auto& s : result.slopes) {
    out << "slope," << to_string(s.mode) << ',' << to_string(s.optimizer) << ',' << fmt(s.mean_gap) << ','
        << fmt(s.var_gap) << ',' << fmt(s.mean_dist) << ',' << fmt(s.var_dist) << '\n';
  }
}

}  // namespace saabo::bench
