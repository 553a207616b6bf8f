#include "saabo/bench/closed_loop.hpp"

#include "saabo/errors.hpp"
#include "saabo/normal.hpp"
#include "saabo/sobol.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <ostream>

namespace saabo::bench {

std::string to_string(SuggestionMode mode) {
  return mode == SuggestionMode::in_sample ? "in_sample" : "out_of_sample";
}

SuggestionMode parse_suggestion_mode(const std::string& name) {
  if (name == "in_sample") return SuggestionMode::in_sample;
  if (name == "out_of_sample") return SuggestionMode::out_of_sample;
  throw ConfigError("unknown suggestion_mode '" + name + "' (expected in_sample or out_of_sample)");
}

std::vector<std::string> algorithm_names() {
  return {"sobol_random", "analytic_ei", "qei", "qnei", "qucb", "okg", "nipv"};
}

void RunConfig::validate() const {
  make_test_function(function);
  bool known = false;
  for (const auto& a : algorithm_names()) known = known || a == algorithm;
  if (!known) throw ConfigError("unknown algorithm '" + algorithm + "'");
  if (q < 1) throw ConfigError("q must be ≥ 1");
  if (iterations < 1) throw ConfigError("iterations must be ≥ 1");
  if (trials < 1) throw ConfigError("trials must be ≥ 1");
  if (algorithm == "analytic_ei" && q != 1) throw ConfigError("analytic_ei requires q = 1");
  if (noise_sd && !(*noise_sd >= 0.0)) throw ConfigError("noise_sd must be nonnegative");
  if (num_samples < 1 || num_fantasies < 1 || num_inner_samples < 1) throw ConfigError("sample counts must be ≥ 1");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (tau && !(*tau > 0.0)) throw ConfigError("tau must be positive");
  if (num_restarts < 1 || fit_restarts < 1 || suggestion_restarts < 1) throw ConfigError("restart counts must be ≥ 1");
  if (raw_samples != 0 && raw_samples < num_restarts) throw ConfigError("raw_samples must be ≥ num_restarts");
  if (nipv_mc_points < 1) throw ConfigError("nipv_mc_points must be ≥ 1");
  if (!(eta >= 0.0)) throw ConfigError("eta must be nonnegative");
}

MatrixXd initial_design(const TestFunction& fn, std::uint64_t seed, int trial) {
  std::uint64_t s = derive_seed(derive_seed(seed, static_cast<std::uint64_t>(trial)), 0x696e6974ULL);
  if (s == 0) s = 1;
  SobolEngine engine(static_cast<int>(fn.dim), s);
  return fn.bounds.from_unit(engine.draw(2 * fn.dim + 2));
}

namespace {

// μ_f(x)·P(c(x) ≤ 0) for independent objective / constraint GPs, or the
// plain posterior mean without a constraint.
BatchObjective suggestion_objective(const ModelList& models, bool constrained) {
  BatchObjective f;
  f.rows = 1;
  f.dim = models.dim();
  f.evaluate = [&models, constrained](const MatrixXd& x) {
    AcquisitionValue out;
    out.grad = MatrixXd::Zero(1, x.cols());
    const GPModel& mf = models[0];
    const double mu_f = mf.posterior_mean(x)(0);
    if (!constrained) {
      out.value = mu_f;
      mf.mean_vjp(x, VectorXd::Ones(1), out.grad);
      return out;
    }
    const GPModel& mc = models[1];
    const double mu_c = mc.posterior_mean(x)(0);
    const double var_c = mc.posterior_variance(x)(0);
    const double sd_c = std::sqrt(std::max(var_c, 1e-18));
    const double z = -mu_c / sd_c;
    const double cdf = normal_cdf(z), pdf = normal_pdf(z);
    out.value = mu_f * cdf;
    mf.mean_vjp(x, VectorXd::Constant(1, cdf), out.grad);
    // ∂z/∂μ_c = −1/σ, ∂z/∂var = μ_c / (2σ³)
    mc.mean_vjp(x, VectorXd::Constant(1, -mu_f * pdf / sd_c), out.grad);
    if (var_c > 1e-18) {
      const MatrixXd W = mc.solve_train(mc.train_cross(x));
      mc.variance_vjp(x, W, VectorXd::Constant(1, mu_f * pdf * mu_c / (2.0 * sd_c * sd_c * sd_c)), out.grad);
    }
    return out;
  };
  f.value = [f](const MatrixXd& x) { return f.evaluate(x).value; };
  return f;
}

KernelParams default_params(const TestFunction& fn, const VectorXd& y) {
  KernelParams p;
  p.lengthscales = 0.2 * fn.bounds.range();
  const double mean = y.mean();
  const double var = (y.array() - mean).square().mean();
  p.outputscale = var > 1e-12 ? var : 1.0;
  p.mean_const = mean;
  p.noise_var_hom = std::max(fn.noise_sd * fn.noise_sd, 1e-6);
  return p;
}

class Trial {
 public:
  Trial(const RunConfig& cfg, const TestFunction& fn, int trial)
      : cfg_(cfg), fn_(fn), trial_(trial), seed_(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial))),
        noise_(derive_seed(seed_, 0x6e6f697365ULL)) {}

  std::vector<TrialRecord> run();

 private:
  void observe_rows(const MatrixXd& X);
  void refit(int iteration);
  MatrixXd propose(int iteration);
  VectorXd suggest(int iteration);
  ObjectiveSpec objective() const;

  const RunConfig& cfg_;
  const TestFunction& fn_;
  int trial_;
  std::uint64_t seed_;
  NoiseStream noise_;
  MatrixXd X_, Y_;
  std::shared_ptr<const ModelList> model_;
  std::vector<KernelParams> params_;
};

void Trial::observe_rows(const MatrixXd& X) {
  const Eigen::Index n = X_.rows(), m = fn_.num_outputs();
  X_.conservativeResize(n + X.rows(), fn_.dim);
  Y_.conservativeResize(n + X.rows(), m);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    X_.row(n + i) = X.row(i);
    Y_.row(n + i) = observe(fn_, X.row(i).transpose(), true, &noise_).transpose();
  }
}

void Trial::refit(int iteration) {
  const Dataset data(X_, Y_);
  FitConfig fc;
  fc.restarts = cfg_.fit_restarts;
  fc.maxiter = cfg_.fit_maxiter;
  fc.seed = derive_seed(seed_, 0x666974ULL + static_cast<std::uint64_t>(iteration));
  fc.input_bounds = fn_.bounds;
  std::vector<GPModel> models;
  for (Eigen::Index j = 0; j < data.num_outputs(); ++j) {
    FitConfig cj = fc;
    cj.seed = derive_seed(fc.seed, static_cast<std::uint64_t>(j));
    if (cfg_.warm_start_fit && static_cast<std::size_t>(j) < params_.size()) cj.warm_start = params_[j];
    const Dataset dj = data.output(j);
    try {
      models.push_back(fit_mle(dj, cj));
    } catch (const Error& e) {
      std::clog << "warning: trial " << trial_ << " iteration " << iteration << ": model fit failed (" << e.what()
                << "); keeping previous hyperparameters\n";
      const KernelParams p =
          static_cast<std::size_t>(j) < params_.size() ? params_[j] : default_params(fn_, dj.Y.col(0));
      models.emplace_back(dj, p);
    }
  }
  params_.clear();
  for (const auto& m : models) params_.push_back(m.params());
  model_ = std::make_shared<const ModelList>(std::move(models));
}

ObjectiveSpec Trial::objective() const {
  if (!fn_.constrained) return ObjectiveSpec::identity();
  double tau;
  if (cfg_.tau) {
    tau = *cfg_.tau;
  } else {
    const VectorXd c = Y_.col(1);
    const double sd = std::sqrt((c.array() - c.mean()).square().mean());
    tau = 1e-3 * (sd > 1e-12 ? sd : 1.0);
  }
  return ObjectiveSpec::feasibility_weighted(0, {1}, tau);
}

MatrixXd Trial::propose(int iteration) {
  const std::uint64_t it_seed = derive_seed(seed_, 0x69746572ULL + static_cast<std::uint64_t>(iteration));
  AcquisitionContext ctx;
  ctx.model = model_;
  ctx.objective = objective();
  ctx.sampler.mode = cfg_.sampler_mode;
  ctx.sampler.seed = it_seed;
  ctx.sampler.num_samples = cfg_.num_samples;
  ctx.params.beta = cfg_.beta;
  ctx.params.num_fantasies = cfg_.num_fantasies;
  ctx.params.num_inner_samples = cfg_.num_inner_samples;

  const AcquisitionKind kind = parse_acquisition_kind(cfg_.algorithm);
  if (kind == AcquisitionKind::qei || kind == AcquisitionKind::analytic_ei) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < X_.rows(); ++i) {
      VectorXd mu(model_->num_outputs());
      for (std::size_t j = 0; j < model_->num_outputs(); ++j) {
        mu(static_cast<Eigen::Index>(j)) = (*model_)[j].posterior_mean(X_.row(i))(0);
      }
      best = std::max(best, ctx.objective.evaluate_point(mu));
    }
    ctx.params.best_f = best;
  }
  if (kind == AcquisitionKind::okg) {
    ctx.params.mu_star = compute_mu_star(model_, ctx.objective, fn_.bounds, derive_seed(it_seed, 0x6d75ULL),
                                         cfg_.suggestion_restarts, ctx.sampler);
  }
  if (kind == AcquisitionKind::nipv) {
    SobolEngine engine(static_cast<int>(fn_.dim), derive_seed(seed_, 0x6d63ULL) | 1ULL);
    ctx.params.mc_points = fn_.bounds.from_unit(engine.draw(cfg_.nipv_mc_points));
  }
  const AcquisitionFunction acqf(kind, ctx, cfg_.q);
  OptimizeConfig oc;
  oc.bounds = fn_.bounds;
  oc.q = cfg_.q;
  oc.raw_samples = cfg_.raw_samples;
  oc.num_restarts = cfg_.num_restarts;
  oc.eta = cfg_.eta;
  oc.maxiter = cfg_.maxiter;
  oc.grad_tol = cfg_.grad_tol;
  oc.ftol = 1e-9;
  oc.mode = cfg_.batch_mode;
  return optimize_acqf(acqf, oc, derive_seed(it_seed, 0x6f7074ULL)).X_star;
}

VectorXd Trial::suggest(int iteration) {
  if (cfg_.suggestion_mode == SuggestionMode::in_sample) {
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < Y_.rows(); ++i) {
      if (fn_.constrained && Y_(i, 1) > 0.0) continue;
      if (best < 0 || Y_(i, 0) > Y_(best, 0)) best = i;
    }
    if (best < 0) Y_.col(1).minCoeff(&best);
    return X_.row(best).transpose();
  }
  const BatchObjective f = suggestion_objective(*model_, fn_.constrained);
  OptimizeConfig oc;
  oc.bounds = fn_.bounds;
  oc.q = 1;
  oc.num_restarts = cfg_.suggestion_restarts;
  oc.raw_samples = std::max<Eigen::Index>(256, cfg_.suggestion_restarts);
  oc.ftol = 1e-9;
  std::vector<MatrixXd> starts =
      gen_initial_conditions(f, oc, derive_seed(seed_, 0x73756767ULL + static_cast<std::uint64_t>(iteration)));
  Eigen::Index best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < X_.rows(); ++i) {
    const double v = f.value(X_.row(i));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  starts.emplace_back(X_.row(best));
  return optimize_from_starts(f, starts, oc).X_star.row(0).transpose();
}

std::vector<TrialRecord> Trial::run() {
  observe_rows(initial_design(fn_, cfg_.seed, trial_));
  const bool random = cfg_.algorithm == "sobol_random";
  const bool need_model = !random || cfg_.suggestion_mode == SuggestionMode::out_of_sample;
  if (need_model) refit(0);
  std::uint64_t rs = derive_seed(seed_, 0x72616e64ULL);
  SobolEngine rand_engine(static_cast<int>(fn_.dim), rs == 0 ? 1 : rs);

  std::vector<TrialRecord> out;
  double best_so_far = -std::numeric_limits<double>::infinity();
  for (int t = 1; t <= cfg_.iterations; ++t) {
    const auto start = std::chrono::steady_clock::now();
    const MatrixXd X_new = random ? fn_.bounds.from_unit(rand_engine.draw(cfg_.q)) : propose(t);
    observe_rows(X_new);
    if (need_model) refit(t);
    const VectorXd x_sugg = suggest(t);
    const double tv = true_value(fn_, fn_.bounds.project(x_sugg.transpose()).row(0).transpose());
    best_so_far = std::max(best_so_far, tv);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    out.push_back({trial_, t, cfg_.algorithm, cfg_.suggestion_mode, x_sugg, tv, best_so_far,
                   cfg_.record_wall_time ? ms : 0.0});
  }
  return out;
}

}  // namespace

std::vector<TrialRecord> run_closed_loop(const RunConfig& config) {
  config.validate();
  TestFunction fn = make_test_function(config.function);
  if (fn.constrained) return run_constrained(config);
  if (config.noise_sd) fn.noise_sd = *config.noise_sd;
  std::vector<TrialRecord> all;
  for (int r = 0; r < config.trials; ++r) {
    auto recs = Trial(config, fn, r).run();
    all.insert(all.end(), recs.begin(), recs.end());
  }
  return all;
}

std::vector<TrialRecord> run_constrained(const RunConfig& config) {
  config.validate();
  TestFunction fn = make_test_function(config.function);
  if (!fn.constrained) throw ConfigError("run_constrained: '" + config.function + "' has no constraint");
  if (config.noise_sd) fn.noise_sd = *config.noise_sd;
  std::vector<TrialRecord> all;
  for (int r = 0; r < config.trials; ++r) {
    auto recs = Trial(config, fn, r).run();
    all.insert(all.end(), recs.begin(), recs.end());
  }
  return all;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_trial_csv(std::ostream& out, const std::vector<TrialRecord>& records, Eigen::Index dim) {
  out << "trial,iteration,algorithm,suggestion_mode";
  for (Eigen::Index k = 0; k < dim; ++k) out << ",x" << (k + 1);
  out << ",true_value,best_so_far,wall_ms\n";
  for (const auto& r : records) {
    out << r.trial << ',' << r.iteration << ',' << r.algorithm << ',' << to_string(r.suggestion_mode);
    for (Eigen::Index k = 0; k < dim; ++k) out << ',' << fmt(r.x(k));
    out << ',' << fmt(r.true_value) << ',' << fmt(r.best_so_far) << ',' << fmt(r.wall_ms) << '\n';
  }
}

}  // namespace saabo::bench
