#include "saabo/optimize.hpp"

#include "saabo/errors.hpp"
#include "saabo/sobol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace saabo {

void OptimizeConfig::validate(Eigen::Index d) const {
  if (bounds.dim() != d) throw ConfigError("optimize: bounds dimension does not match the model");
  if (q < 1) throw ConfigError("optimize: q must be ≥ 1");
  if (num_restarts < 1) throw ConfigError("optimize: num_restarts must be ≥ 1");
  if (effective_raw_samples() < num_restarts) throw ConfigError("optimize: raw_samples must be ≥ num_restarts");
  if (!(eta >= 0.0)) throw ConfigError("optimize: eta must be nonnegative");
  if (maxiter < 0) throw ConfigError("optimize: maxiter must be ≥ 0");
}

BatchObjective as_batch_objective(const AcquisitionFunction& acqf) {
  BatchObjective f;
  f.rows = acqf.num_rows();
  f.dim = acqf.dim();
  f.evaluate = [&acqf](const MatrixXd& X) { return acqf.evaluate(X); };
  f.value = [&acqf](const MatrixXd& X) { return acqf.value(X); };
  return f;
}

std::vector<Eigen::Index> boltzmann_select(const VectorXd& values, Eigen::Index k, double eta, std::uint64_t seed) {
  std::vector<Eigen::Index> finite;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::isfinite(values(i))) finite.push_back(i);
  }
  if (finite.empty()) throw OptimizationError("initial conditions: every raw acquisition value is non-finite");
  double mean = 0.0;
  for (auto i : finite) mean += values(i);
  mean /= static_cast<double>(finite.size());
  double var = 0.0;
  for (auto i : finite) var += (values(i) - mean) * (values(i) - mean);
  const double sd = std::sqrt(var / static_cast<double>(finite.size()));
  const bool flat = !(sd >= 1e-12);

  // Efraimidis–Spirakis: keep the k largest log(u)/w, w = exp(η v).
  std::vector<std::pair<double, Eigen::Index>> keys;
  keys.reserve(finite.size());
  for (auto i : finite) {
    const double u = (static_cast<double>(mix64(seed ^ mix64(static_cast<std::uint64_t>(i))) >> 11) + 0.5) * 0x1.0p-53;
    const double v = flat ? 0.0 : (values(i) - mean) / sd;
    keys.emplace_back(std::log(u) * std::exp(-eta * v), i);
  }
  std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max<Eigen::Index>(k, 0)), keys.size());
  std::vector<Eigen::Index> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) out.push_back(keys[r].second);
  return out;
}

namespace {

MatrixXd unflatten(const VectorXd& x, Eigen::Index rows, Eigen::Index d) {
  MatrixXd X(rows, d);
  for (Eigen::Index i = 0; i < rows; ++i) X.row(i) = x.segment(i * d, d).transpose();
  return X;
}

VectorXd flatten(const MatrixXd& X) {
  VectorXd x(X.size());
  for (Eigen::Index i = 0; i < X.rows(); ++i) x.segment(i * X.cols(), X.cols()) = X.row(i).transpose();
  return x;
}

// Ñ₀ raw tuples, each rows×d, from a scrambled Sobol stream of dimension rows·d.
std::vector<MatrixXd> raw_tuples(Eigen::Index count, Eigen::Index rows, const Bounds& bounds, std::uint64_t seed) {
  const Eigen::Index d = bounds.dim();
  std::uint64_t scramble = derive_seed(seed, 0x726177ULL);
  if (scramble == 0) scramble = 1;
  SobolEngine engine(static_cast<int>(rows * d), scramble);
  const MatrixXd U = engine.draw(count);
  std::vector<MatrixXd> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index r = 0; r < count; ++r) {
    out.push_back(bounds.from_unit(unflatten(U.row(r).transpose(), rows, d)));
  }
  return out;
}

std::vector<MatrixXd> select_starts(const BatchObjective& f, std::vector<MatrixXd> raw, const OptimizeConfig& config,
                                    std::uint64_t seed) {
  VectorXd vals(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t r = 0; r < raw.size(); ++r) {
    double v;
    try {
      v = f.value(raw[r]);
    } catch (const NotPsdError&) {
      v = std::numeric_limits<double>::quiet_NaN();
    }
    vals(static_cast<Eigen::Index>(r)) = v;
  }
  const auto idx = boltzmann_select(vals, config.num_restarts, config.eta, derive_seed(seed, 0x626f6c74ULL));
  std::vector<MatrixXd> starts;
  starts.reserve(idx.size());
  for (auto i : idx) starts.push_back(std::move(raw[static_cast<std::size_t>(i)]));
  return starts;
}

Bounds tiled_bounds(const Bounds& b, Eigen::Index rows) {
  VectorXd lo(rows * b.dim()), hi(rows * b.dim());
  for (Eigen::Index i = 0; i < rows; ++i) {
    lo.segment(i * b.dim(), b.dim()) = b.lower;
    hi.segment(i * b.dim(), b.dim()) = b.upper;
  }
  return Bounds(lo, hi);
}

}  // namespace

std::vector<MatrixXd> gen_initial_conditions(const BatchObjective& f, const OptimizeConfig& config,
                                             std::uint64_t seed) {
  config.validate(f.dim);
  OptimizeConfig cfg = config;
  if (cfg.raw_samples <= 0) cfg.raw_samples = 1024 * f.rows;
  return select_starts(f, raw_tuples(cfg.raw_samples, f.rows, config.bounds, seed), cfg, seed);
}

std::vector<MatrixXd> gen_initial_conditions(const AcquisitionFunction& acqf, const OptimizeConfig& config,
                                             std::uint64_t seed) {
  return gen_initial_conditions(as_batch_objective(acqf), config, seed);
}

namespace {

struct RestartResult {
  MatrixXd X;  ///< final point, empty when the start failed
  double value = -std::numeric_limits<double>::infinity();
  bool converged = false;
};

std::vector<RestartResult> run_restarts(const BatchObjective& f, const std::vector<MatrixXd>& starts,
                                        const OptimizeConfig& config) {
  const Eigen::Index rows = f.rows, d = f.dim;
  const Bounds box = tiled_bounds(config.bounds, rows);
  QuasiNewtonConfig qn;
  qn.maxiter = config.maxiter;
  qn.grad_tol = config.grad_tol;
  qn.ftol = config.ftol;

  auto fun = [&](const VectorXd& x, VectorXd& g) {
    try {
      const AcquisitionValue v = f.evaluate(unflatten(x, rows, d));
      g = flatten(v.grad);
      return v.value;
    } catch (const NotPsdError&) {
      g.setZero(x.size());
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  std::vector<RestartResult> out(starts.size());
  for (std::size_t r = 0; r < starts.size(); ++r) {
    const VectorXd x0 = box.lower.cwiseMax(flatten(starts[r])).cwiseMin(box.upper);
    VectorXd g0(x0.size());
    const double v0 = fun(x0, g0);
    if (!std::isfinite(v0)) continue;
    if (g0.lpNorm<Eigen::Infinity>() < 1e-12) {
      out[r] = {unflatten(x0, rows, d), v0, true};
    } else {
      const QuasiNewtonResult qr = bounded_quasi_newton(fun, x0, box, Sense::maximize, qn);
      out[r] = {unflatten(qr.x, rows, d), qr.value, qr.converged};
    }
  }
  return out;
}

CandidateResult best_of(const std::vector<RestartResult>& runs, const Bounds& bounds) {
  CandidateResult res;
  res.restart_values.resize(static_cast<Eigen::Index>(runs.size()));
  res.converged.resize(runs.size());
  int best = -1;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    res.restart_values(static_cast<Eigen::Index>(r)) = runs[r].value;
    res.converged[r] = runs[r].converged;
    if (std::isfinite(runs[r].value) && (best < 0 || runs[r].value > runs[static_cast<std::size_t>(best)].value)) {
      best = static_cast<int>(r);
    }
  }
  if (best < 0) throw OptimizationError("optimize_acqf: every restart failed to produce a finite value");
  res.X_star = bounds.project(runs[static_cast<std::size_t>(best)].X);
  res.value = runs[static_cast<std::size_t>(best)].value;
  return res;
}

// With the candidate rows fixed, the fantasy inner problems decouple, so a
// fantasy whose x′ scores below another fantasy's x′ (or the best observed
// point) can adopt it. Updates X and value; returns true if any row changed.
bool share_inner_solutions(const BatchObjective& f, Eigen::Index q, const Bounds& bounds, const MatrixXd& extra,
                           MatrixXd& X, double& value) {
  const Eigen::Index Nf = X.rows() - q;
  const VectorXd scale = bounds.range().cwiseInverse();
  const auto same = [&](const VectorXd& a, const VectorXd& b) {
    return (a - b).cwiseProduct(scale).lpNorm<Eigen::Infinity>() < 1e-3;
  };
  constexpr std::size_t kMaxCandidates = 16;
  std::vector<VectorXd> cands;
  const auto add = [&](const VectorXd& c) {
    if (cands.size() >= kMaxCandidates) return;
    for (const auto& e : cands)
      if (same(e, c)) return;
    cands.push_back(c);
  };
  for (Eigen::Index i = 0; i < extra.rows(); ++i) add(extra.row(i).transpose());
  for (Eigen::Index i = 0; i < Nf; ++i) add(X.row(q + i).transpose());

  bool changed = false;
  for (Eigen::Index i = 0; i < Nf; ++i) {
    for (const auto& c : cands) {
      if (same(X.row(q + i).transpose(), c)) continue;
      MatrixXd trial = X;
      trial.row(q + i) = c.transpose();
      double v;
      try {
        v = f.value(trial);
      } catch (const NotPsdError&) {
        continue;
      }
      if (v > value + 1e-12 * std::max(1.0, std::abs(value))) {
        X = std::move(trial);
        value = v;
        changed = true;
      }
    }
  }
  return changed;
}

}  // namespace

CandidateResult optimize_from_starts(const BatchObjective& f, const std::vector<MatrixXd>& starts,
                                     const OptimizeConfig& config) {
  return best_of(run_restarts(f, starts, config), config.bounds);
}

CandidateResult optimize_acqf(const BatchObjective& f, const OptimizeConfig& config, std::uint64_t seed) {
  return optimize_from_starts(f, gen_initial_conditions(f, config, seed), config);
}

CandidateResult optimize_acqf(const AcquisitionFunction& acqf, const OptimizeConfig& config, std::uint64_t seed) {
  if (acqf.kind() == AcquisitionKind::okg) return optimize_one_shot_kg(acqf, config, seed);
  config.validate(acqf.dim());
  if (config.mode == BatchMode::joint || config.q == 1) {
    if (acqf.q() == config.q) return optimize_acqf(as_batch_objective(acqf), config, seed);
    const AcquisitionFunction a = acqf.rebuild(config.q, acqf.context().X_pending);
    return optimize_acqf(as_batch_objective(a), config, seed);
  }
  const MatrixXd& pending0 = acqf.context().X_pending;
  const Eigen::Index d = acqf.dim();
  OptimizeConfig step = config;
  step.q = 1;
  step.raw_samples = config.raw_samples > 0 ? config.raw_samples : 1024;
  MatrixXd selected(0, d);
  CandidateResult last;
  for (Eigen::Index k = 0; k < config.q; ++k) {
    MatrixXd pending(selected.rows() + pending0.rows(), d);
    pending << selected, pending0;
    const AcquisitionFunction a = acqf.rebuild(1, pending);
    const std::uint64_t s = k == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(k));
    last = optimize_acqf(as_batch_objective(a), step, s);
    selected.conservativeResize(selected.rows() + 1, Eigen::NoChange);
    selected.row(selected.rows() - 1) = last.X_star.row(0);
  }
  last.X_star = selected;
  return last;
}

CandidateResult optimize_one_shot_kg(const AcquisitionFunction& acqf, const OptimizeConfig& config,
                                     std::uint64_t seed) {
  if (acqf.kind() != AcquisitionKind::okg) throw ConfigError("optimize_one_shot_kg: acquisition is not one-shot KG");
  const Eigen::Index q = acqf.q(), d = acqf.dim(), Nf = acqf.num_rows() - q;
  OptimizeConfig cfg = config;
  cfg.q = q;
  cfg.validate(d);
  const AcquisitionContext& ctx = acqf.context();

  // Fantasy-point pool: Boltzmann selection on the posterior-mean objective.
  AcquisitionContext pm_ctx;
  pm_ctx.model = ctx.model;
  pm_ctx.objective = ctx.objective;
  pm_ctx.params.num_inner_samples = ctx.params.num_inner_samples;
  pm_ctx.sampler = ctx.sampler;
  const AcquisitionFunction pm(AcquisitionKind::simple_regret, pm_ctx, 1);
  const Eigen::Index pool_size = 1024;
  const std::vector<MatrixXd> pool = raw_tuples(pool_size, 1, cfg.bounds, derive_seed(seed, 0x706f6f6cULL));
  VectorXd pool_vals(pool_size);
  for (Eigen::Index i = 0; i < pool_size; ++i) pool_vals(i) = pm.value(pool[static_cast<std::size_t>(i)]);

  // Best observed points, ranked by the posterior-mean objective.
  const MatrixXd& T = ctx.model->train_inputs();
  std::vector<std::pair<double, Eigen::Index>> ranked;
  for (Eigen::Index i = 0; i < T.rows(); ++i) ranked.emplace_back(-pm.value(T.row(i)), i);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  const Eigen::Index raw_count = cfg.effective_raw_samples();
  const std::vector<MatrixXd> raw_x = raw_tuples(raw_count, q, cfg.bounds, seed);
  const Eigen::Index n_pool = (Nf + 1) / 2, n_best = ranked.empty() ? 0 : Nf - n_pool;
  std::vector<MatrixXd> raw;
  raw.reserve(static_cast<std::size_t>(raw_count));
  for (Eigen::Index r = 0; r < raw_count; ++r) {
    MatrixXd Xa(q + Nf, d);
    Xa.topRows(q) = raw_x[static_cast<std::size_t>(r)];
    const auto pick = boltzmann_select(pool_vals, Nf - n_best, cfg.eta,
                                       derive_seed(seed, 0x66616e74ULL + static_cast<std::uint64_t>(r)));
    Eigen::Index row = q;
    for (auto i : pick) Xa.row(row++) = pool[static_cast<std::size_t>(i)].row(0);
    for (Eigen::Index b = 0; b < n_best; ++b) {
      Xa.row(row++) = T.row(ranked[static_cast<std::size_t>(b) % ranked.size()].second);
    }
    while (row < q + Nf) Xa.row(row++) = pool[0].row(0);
    raw.push_back(std::move(Xa));
  }
  const BatchObjective f = as_batch_objective(acqf);
  const std::vector<MatrixXd> starts = select_starts(f, std::move(raw), cfg, seed);
  std::vector<RestartResult> runs = run_restarts(f, starts, cfg);
  const MatrixXd best_observed = ranked.empty() ? MatrixXd(0, d) : MatrixXd(T.row(ranked.front().second));
  for (RestartResult& run : runs) {
    if (run.X.size() == 0) continue;
    MatrixXd repaired = run.X;
    double value = run.value;
    if (!share_inner_solutions(f, q, cfg.bounds, best_observed, repaired, value)) continue;
    const std::vector<RestartResult> again = run_restarts(f, {repaired}, cfg);
    if (again.front().value > run.value) run = again.front();
  }
  CandidateResult res = best_of(runs, cfg.bounds);
  res.fantasy_points = res.X_star.bottomRows(Nf);
  res.X_star = MatrixXd(res.X_star.topRows(q));
  return res;
}

MatrixXd maximize_posterior_mean(std::shared_ptr<const ModelList> model, const ObjectiveSpec& objective,
                                 const Bounds& bounds, std::uint64_t seed, int restarts, const SamplerSpec& sampler,
                                 double* max_value) {
  AcquisitionContext ctx;
  ctx.model = std::move(model);
  ctx.objective = objective;
  ctx.sampler = sampler;
  const AcquisitionFunction pm(AcquisitionKind::simple_regret, ctx, 1);
  OptimizeConfig cfg;
  cfg.bounds = bounds;
  cfg.q = 1;
  cfg.num_restarts = restarts;
  cfg.raw_samples = std::max<Eigen::Index>(1024, restarts);
  const BatchObjective f = as_batch_objective(pm);
  std::vector<MatrixXd> starts = gen_initial_conditions(f, cfg, seed);
  // Observed locations are natural candidates for the maximum as well.
  const MatrixXd& T = pm.context().model->train_inputs();
  Eigen::Index best_train = -1;
  double best_val = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    if (!bounds.contains(T.row(i).transpose())) continue;
    const double v = pm.value(T.row(i));
    if (v > best_val) {
      best_val = v;
      best_train = i;
    }
  }
  if (best_train >= 0) starts.emplace_back(T.row(best_train));
  CandidateResult res = optimize_from_starts(f, starts, cfg);
  if (max_value) *max_value = res.value;
  return res.X_star;
}

double compute_mu_star(std::shared_ptr<const ModelList> model, const ObjectiveSpec& objective, const Bounds& bounds,
                       std::uint64_t seed, int restarts, const SamplerSpec& sampler) {
  double v = 0.0;
  maximize_posterior_mean(std::move(model), objective, bounds, seed, restarts, sampler, &v);
  return v;
}

}  // namespace saabo
