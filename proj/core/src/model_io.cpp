#include "saabo/model_io.hpp"

#include <fstream>

namespace saabo {

namespace {

using nlohmann::json;

json vec_to_json(const VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json mat_to_json(const MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) rows.push_back(vec_to_json(M.row(i).transpose()));
  return rows;
}

VectorXd json_to_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MatrixXd json_to_mat(const json& j, Eigen::Index cols) {
  if (!j.is_array()) throw ConfigError("model document: expected an array of rows");
  MatrixXd M(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const VectorXd r = json_to_vec(j[i]);
    if (r.size() != cols) throw ConfigError("model document: ragged matrix row");
    M.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  return M;
}

}  // namespace

json model_to_json(const ModelList& models, const std::optional<Bounds>& bounds) {
  json doc;
  doc["schema"] = 1;
  doc["kernel"] = "matern52_ard";
  const Eigen::Index n = models[0].num_train();
  doc["X"] = mat_to_json(models.train_inputs());
  MatrixXd Y(n, static_cast<Eigen::Index>(models.num_outputs()));
  std::optional<MatrixXd> nv;
  if (models[0].dataset().noise_var) nv = MatrixXd(n, Y.cols());
  json outs = json::array();
  for (std::size_t j = 0; j < models.num_outputs(); ++j) {
    const GPModel& m = models[j];
    Y.col(static_cast<Eigen::Index>(j)) = m.dataset().Y.col(0);
    if (nv) nv->col(static_cast<Eigen::Index>(j)) = m.dataset().noise_var->col(0);
    const KernelParams& p = m.params();
    outs.push_back({{"lengthscales", vec_to_json(p.lengthscales)},
                    {"outputscale", p.outputscale},
                    {"mean_const", p.mean_const},
                    {"noise_var_hom", p.noise_var_hom}});
  }
  doc["Y"] = mat_to_json(Y);
  if (nv) doc["noise_var"] = mat_to_json(*nv);
  doc["outputs"] = outs;
  if (bounds) doc["bounds"] = {{"lower", vec_to_json(bounds->lower)}, {"upper", vec_to_json(bounds->upper)}};
  return doc;
}

SavedModel model_from_json(const json& doc) {
  try {
    if (!doc.contains("schema") || doc.at("schema").get<int>() != 1) {
      throw ConfigError("model document: unsupported or missing schema version");
    }
    const auto& outs = doc.at("outputs");
    if (!outs.is_array() || outs.empty()) throw ConfigError("model document: no outputs");
    const Eigen::Index d = static_cast<Eigen::Index>(outs[0].at("lengthscales").size());
    const Eigen::Index m = static_cast<Eigen::Index>(outs.size());
    Dataset data(json_to_mat(doc.at("X"), d), json_to_mat(doc.at("Y"), m));
    if (doc.contains("noise_var")) data.noise_var = json_to_mat(doc.at("noise_var"), m);
    data.validate();

    std::vector<GPModel> models;
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& o = outs[static_cast<std::size_t>(j)];
      KernelParams p;
      p.lengthscales = json_to_vec(o.at("lengthscales"));
      p.outputscale = o.at("outputscale").get<double>();
      p.mean_const = o.at("mean_const").get<double>();
      p.noise_var_hom = o.at("noise_var_hom").get<double>();
      models.emplace_back(data.output(j), p);
    }
    SavedModel out{ModelList(std::move(models)), std::nullopt};
    if (doc.contains("bounds")) {
      out.bounds = Bounds(json_to_vec(doc["bounds"].at("lower")), json_to_vec(doc["bounds"].at("upper")));
    }
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model document: ") + e.what());
  }
}

void save_model(const std::string& path, const ModelList& models, const std::optional<Bounds>& bounds) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << model_to_json(models, bounds).dump(2) << '\n';
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("model file " + path + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace saabo
