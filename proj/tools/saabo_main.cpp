// saabo: closed-loop benchmarks, convergence studies, model fitting and
// candidate suggestion from the command line.

#include "saabo/bench/config.hpp"
#include "saabo/dataset.hpp"
#include "saabo/errors.hpp"
#include "saabo/model_io.hpp"
#include "saabo/optimize.hpp"
#include "saabo/sobol.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace {

using namespace saabo;

// Writes to --out when given, stdout otherwise.
void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot open output file '" + out_path + "'");
  out << text;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct SuggestOptions {
  std::string model_path, acqf = "qnei", out, sampler = "rqmc", batch_mode = "joint";
  long long q = 1, num_samples = 128, raw_samples = 0, num_fantasies = 64;
  int restarts = 20;
  double beta = 0.2;
  std::uint64_t seed = 0;
};

int run_suggest(const SuggestOptions& o) {
  const SavedModel saved = load_model(o.model_path);
  auto model = std::make_shared<const ModelList>(saved.models);
  if (model->num_outputs() != 1) throw ConfigError("suggest supports single-output models only");
  const MatrixXd& X = model->train_inputs();
  Bounds bounds = saved.bounds ? *saved.bounds : Bounds(X.colwise().minCoeff(), X.colwise().maxCoeff());

  const AcquisitionKind kind = parse_acquisition_kind(o.acqf);
  if (kind == AcquisitionKind::analytic_ei && o.q != 1) throw ConfigError("analytic_ei requires --q 1");
  if (o.q < 1) throw ConfigError("--q must be ≥ 1");
  AcquisitionContext ctx;
  ctx.model = model;
  ctx.objective = ObjectiveSpec::identity();
  ctx.sampler.mode = parse_sample_mode(o.sampler);
  ctx.sampler.seed = derive_seed(o.seed, 0x73616d70ULL);
  ctx.sampler.num_samples = o.num_samples;
  ctx.params.beta = o.beta;
  ctx.params.num_fantasies = o.num_fantasies;
  ctx.params.best_f = (*model)[0].posterior_mean(X).maxCoeff();
  if (kind == AcquisitionKind::okg) {
    ctx.params.mu_star = compute_mu_star(model, ctx.objective, bounds, derive_seed(o.seed, 0x6d75ULL), 10, ctx.sampler);
  }
  if (kind == AcquisitionKind::nipv) {
    SobolEngine engine(static_cast<int>(X.cols()), derive_seed(o.seed, 0x6d63ULL) | 1ULL);
    ctx.params.mc_points = bounds.from_unit(engine.draw(256));
  }
  const AcquisitionFunction acqf(kind, ctx, o.q);
  OptimizeConfig oc;
  oc.bounds = bounds;
  oc.q = o.q;
  oc.raw_samples = o.raw_samples;
  oc.num_restarts = o.restarts;
  if (o.batch_mode == "sequential_greedy") oc.mode = BatchMode::sequential_greedy;
  else if (o.batch_mode != "joint") throw ConfigError("unknown --batch-mode '" + o.batch_mode + "'");
  const CandidateResult r = optimize_acqf(acqf, oc, derive_seed(o.seed, 0x6f7074ULL));

  std::ostringstream ss;
  ss << "point";
  for (Eigen::Index k = 0; k < r.X_star.cols(); ++k) ss << ",x" << (k + 1);
  ss << ",acq_value\n";
  for (Eigen::Index i = 0; i < r.X_star.rows(); ++i) {
    ss << i;
    for (Eigen::Index k = 0; k < r.X_star.cols(); ++k) ss << ',' << fmt(r.X_star(i, k));
    ss << ',' << fmt(r.value) << '\n';
  }
  emit(o.out, ss.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo Bayesian optimization toolkit"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "benchmark harness");
  bench->require_subcommand(1);
  std::string run_config, run_out;
  auto* run = bench->add_subcommand("run", "closed-loop optimization on a synthetic test function");
  run->add_option("--config", run_config, "JSON run configuration")->required();
  run->add_option("--out", run_out, "CSV output path (default stdout)");

  std::string conv_config, conv_out;
  auto* conv = bench->add_subcommand("convergence", "sample-average-approximation convergence study");
  conv->add_option("--config", conv_config, "JSON study configuration")->required();
  conv->add_option("--out", conv_out, "CSV output path (default stdout)");

  std::string data_path, model_out;
  int fit_restarts = 8;
  std::uint64_t fit_seed = 0;
  auto* fit = app.add_subcommand("fit", "fit GP hyperparameters by maximum likelihood");
  fit->add_option("--data", data_path, "CSV with header x1,...,xd,y[,noise_var]")->required();
  fit->add_option("--out", model_out, "model JSON output path")->required();
  fit->add_option("--restarts", fit_restarts, "optimizer restarts");
  fit->add_option("--seed", fit_seed, "random seed");

  SuggestOptions so;
  auto* suggest = app.add_subcommand("suggest", "optimize an acquisition function on a saved model");
  suggest->add_option("--model", so.model_path, "model JSON written by `fit`")->required();
  suggest->add_option("--acqf", so.acqf, "analytic_ei, qei, qnei, qucb, simple_regret, okg or nipv");
  suggest->add_option("--q", so.q, "batch size");
  suggest->add_option("--seed", so.seed, "random seed");
  suggest->add_option("--sampler", so.sampler, "iid or rqmc");
  suggest->add_option("--num-samples", so.num_samples, "Monte-Carlo samples");
  suggest->add_option("--num-fantasies", so.num_fantasies, "fantasies for okg");
  suggest->add_option("--beta", so.beta, "qucb exploration weight");
  suggest->add_option("--restarts", so.restarts, "optimizer restarts");
  suggest->add_option("--raw-samples", so.raw_samples, "initialization candidates (0: 1024·q)");
  suggest->add_option("--batch-mode", so.batch_mode, "joint or sequential_greedy");
  suggest->add_option("--out", so.out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      const bench::RunConfig cfg = bench::load_run_config(run_config);
      const auto records = bench::run_closed_loop(cfg);
      std::ostringstream ss;
      bench::write_trial_csv(ss, records, bench::make_test_function(cfg.function).dim);
      emit(run_out, ss.str());
    } else if (conv->parsed()) {
      const bench::ConvergenceConfig cfg = bench::load_convergence_config(conv_config);
      std::ostringstream ss;
      bench::write_convergence_csv(ss, bench::run_convergence_study(cfg));
      emit(conv_out, ss.str());
    } else if (fit->parsed()) {
      if (fit_restarts < 1) throw ConfigError("--restarts must be ≥ 1");
      const Dataset data = read_dataset_csv(data_path);
      FitConfig fc;
      fc.restarts = fit_restarts;
      fc.seed = fit_seed;
      const ModelList models = fit_model_list(data, fc);
      save_model(model_out, models, Bounds(data.X.colwise().minCoeff(), data.X.colwise().maxCoeff()));
    } else if (suggest->parsed()) {
      return run_suggest(so);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
