#include "saabo/bench/config.hpp"

#include "saabo/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace saabo::bench {

namespace {

using nlohmann::json;
using Setter = std::function<void(const json&)>;

json parse_object(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  return doc;
}

void apply(const json& doc, const std::map<std::string, Setter>& setters) {
  for (const auto& [key, value] : doc.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->second(value);
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

template <class T>
Setter set(T& field) {
  return [&field](const json& v) { field = v.get<T>(); };
}

Setter set_index(Eigen::Index& field) {
  return [&field](const json& v) { field = static_cast<Eigen::Index>(v.get<long long>()); };
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BatchMode parse_batch_mode(const std::string& s) {
  if (s == "joint") return BatchMode::joint;
  if (s == "sequential_greedy") return BatchMode::sequential_greedy;
  throw ConfigError("unknown batch_mode '" + s + "' (expected joint or sequential_greedy)");
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  const json doc = parse_object(json_text);
  RunConfig c;
  apply(doc, {
                 {"function", set(c.function)},
                 {"algorithm", set(c.algorithm)},
                 {"q", set_index(c.q)},
                 {"iterations", set(c.iterations)},
                 {"trials", set(c.trials)},
                 {"seed", set(c.seed)},
                 {"suggestion_mode",
                  [&c](const json& v) { c.suggestion_mode = parse_suggestion_mode(v.get<std::string>()); }},
                 {"noise_sd", [&c](const json& v) { c.noise_sd = v.get<double>(); }},
                 {"sampler", [&c](const json& v) { c.sampler_mode = parse_sample_mode(v.get<std::string>()); }},
                 {"num_samples", set_index(c.num_samples)},
                 {"num_fantasies", set_index(c.num_fantasies)},
                 {"num_inner_samples", set_index(c.num_inner_samples)},
                 {"beta", set(c.beta)},
                 {"nipv_mc_points", set_index(c.nipv_mc_points)},
                 {"tau", [&c](const json& v) { c.tau = v.get<double>(); }},
                 {"num_restarts", set(c.num_restarts)},
                 {"raw_samples", set_index(c.raw_samples)},
                 {"eta", set(c.eta)},
                 {"maxiter", set(c.maxiter)},
                 {"grad_tol", set(c.grad_tol)},
                 {"batch_mode", [&c](const json& v) { c.batch_mode = parse_batch_mode(v.get<std::string>()); }},
                 {"fit_restarts", set(c.fit_restarts)},
                 {"fit_maxiter", set(c.fit_maxiter)},
                 {"warm_start_fit", set(c.warm_start_fit)},
                 {"suggestion_restarts", set(c.suggestion_restarts)},
                 {"record_wall_time", set(c.record_wall_time)},
             });
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path)); }

ConvergenceConfig parse_convergence_config(const std::string& json_text) {
  const json doc = parse_object(json_text);
  ConvergenceConfig c;
  apply(doc, {
                 {"sizes", set(c.sizes)},
                 {"schedule",
                  [&c](const json& v) {
                    if (!v.is_object()) throw ConfigError("schedule must be an object {base, M, k_max}");
                    for (const auto& [k, x] : v.items()) {
                      if (k == "base") c.schedule.base = x.get<int>();
                      else if (k == "M") c.schedule.M = x.get<int>();
                      else if (k == "k_max") c.schedule.k_max = x.get<int>();
                      else throw ConfigError("unknown schedule key '" + k + "'");
                    }
                  }},
                 {"min_size", set(c.min_size)},
                 {"modes",
                  [&c](const json& v) {
                    c.modes.clear();
                    for (const auto& m : v) c.modes.push_back(parse_sample_mode(m.get<std::string>()));
                  }},
                 {"optimizers",
                  [&c](const json& v) {
                    c.optimizers.clear();
                    for (const auto& o : v) c.optimizers.push_back(parse_convergence_optimizer(o.get<std::string>()));
                  }},
                 {"replications", set(c.replications)},
                 {"seed", set(c.seed)},
                 {"fixture_seed", set(c.fixture_seed)},
                 {"fixture_points", set_index(c.fixture_points)},
                 {"num_restarts", set(c.num_restarts)},
                 {"raw_samples", set_index(c.raw_samples)},
                 {"eta", set(c.eta)},
                 {"maxiter", set(c.maxiter)},
                 {"grad_tol", set(c.grad_tol)},
                 {"adam_steps", set(c.adam_steps)},
                 {"adam_lr", set(c.adam_lr)},
             });
  c.validate();
  return c;
}

ConvergenceConfig load_convergence_config(const std::string& path) {
  return parse_convergence_config(read_file(path));
}

}  // namespace saabo::bench
