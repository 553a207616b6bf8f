#pragma once

#include "saabo/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace saabo {

/// Observed inputs X (n×d), outputs Y (n×m) and optional per-observation
/// noise variances (n×m). Without noise variances the noise level is inferred.
struct Dataset {
  MatrixXd X;
  MatrixXd Y;
  std::optional<MatrixXd> noise_var;

  Dataset() = default;
  Dataset(MatrixXd x, MatrixXd y, std::optional<MatrixXd> noise = std::nullopt);

  Eigen::Index num_points() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }
  Eigen::Index num_outputs() const { return Y.cols(); }
  bool has_fixed_noise() const { return noise_var.has_value(); }

  /// Throws ShapeError/ConfigError on violated invariants.
  void validate() const;

  /// Single-output slice for output `j`.
  Dataset output(Eigen::Index j) const;

  /// New dataset with extra rows appended.
  Dataset appended(const MatrixXd& x_new, const MatrixXd& y_new,
                   const std::optional<MatrixXd>& noise_new = std::nullopt) const;
};

/// Parse CSV with header `x1,...,xd,y[,noise_var]`. Multiple outputs may be
/// given as `y1,...,ym` with matching `noise_var1,...`.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

}  // namespace saabo
