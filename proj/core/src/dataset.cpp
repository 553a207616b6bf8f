#include "saabo/dataset.hpp"

#include "saabo/errors.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace saabo {

Dataset::Dataset(MatrixXd x, MatrixXd y, std::optional<MatrixXd> noise)
    : X(std::move(x)), Y(std::move(y)), noise_var(std::move(noise)) {
  validate();
}

void Dataset::validate() const {
  if (X.cols() < 1) throw ShapeError("dataset: input dimension d must be >= 1");
  if (Y.cols() < 1) throw ShapeError("dataset: number of outputs m must be >= 1");
  if (X.rows() != Y.rows()) throw ShapeError("dataset: X and Y row counts differ");
  if (!X.allFinite() || !Y.allFinite()) throw ConfigError("dataset: non-finite observations");
  if (noise_var) {
    if (noise_var->rows() != Y.rows() || noise_var->cols() != Y.cols()) {
      throw ShapeError("dataset: noise_var shape must match Y");
    }
    if (!noise_var->allFinite() || (noise_var->array() < 0.0).any()) {
      throw ConfigError("dataset: noise variances must be finite and >= 0");
    }
  }
}

Dataset Dataset::output(Eigen::Index j) const {
  if (j < 0 || j >= Y.cols()) throw ShapeError("dataset: output index out of range");
  std::optional<MatrixXd> nv;
  if (noise_var) nv = MatrixXd(noise_var->col(j));
  return Dataset(X, MatrixXd(Y.col(j)), std::move(nv));
}

Dataset Dataset::appended(const MatrixXd& x_new, const MatrixXd& y_new,
                          const std::optional<MatrixXd>& noise_new) const {
  if (x_new.cols() != X.cols() || y_new.cols() != Y.cols() || x_new.rows() != y_new.rows()) {
    throw ShapeError("dataset: appended block shape mismatch");
  }
  if (noise_var.has_value() != noise_new.has_value()) {
    throw ShapeError("dataset: appended noise must be given iff the dataset has fixed noise");
  }
  const Eigen::Index n = X.rows(), k = x_new.rows();
  MatrixXd x(n + k, X.cols()), y(n + k, Y.cols());
  x << X, x_new;
  y << Y, y_new;
  std::optional<MatrixXd> nv;
  if (noise_var) {
    nv = MatrixXd(n + k, Y.cols());
    *nv << *noise_var, *noise_new;
  }
  return Dataset(std::move(x), std::move(y), std::move(nv));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: missing header row");
  const auto header = split_csv_line(line);

  std::vector<int> xcols, ycols, ncols;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const std::string& h = header[c];
    if (h.rfind("noise_var", 0) == 0) {
      ncols.push_back(c);
    } else if (!h.empty() && h[0] == 'x') {
      xcols.push_back(c);
    } else if (!h.empty() && h[0] == 'y') {
      ycols.push_back(c);
    } else {
      throw ConfigError("csv: unrecognized column '" + h + "'");
    }
  }
  if (xcols.empty() || ycols.empty()) throw ConfigError("csv: need at least one x column and one y column");
  if (!ncols.empty() && ncols.size() != ycols.size()) {
    throw ConfigError("csv: one noise_var column per output required");
  }

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ConfigError("csv: wrong number of fields on line " + std::to_string(lineno));
    }
    std::vector<double> vals;
    vals.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        std::size_t pos = 0;
        vals.push_back(std::stod(c, &pos));
        if (pos != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw ConfigError("csv: non-numeric field '" + c + "' on line " + std::to_string(lineno));
      }
    }
    rows.push_back(std::move(vals));
  }

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  MatrixXd X(n, xcols.size()), Y(n, ycols.size());
  std::optional<MatrixXd> nv;
  if (!ncols.empty()) nv = MatrixXd(n, ncols.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < xcols.size(); ++k) X(i, k) = rows[i][xcols[k]];
    for (std::size_t k = 0; k < ycols.size(); ++k) Y(i, k) = rows[i][ycols[k]];
    for (std::size_t k = 0; k < ncols.size(); ++k) (*nv)(i, k) = rows[i][ncols[k]];
  }
  try {
    return Dataset(std::move(X), std::move(Y), std::move(nv));
  } catch (const ShapeError& e) {
    throw ConfigError(e.what());
  }
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("csv: cannot open '" + path + "'");
  return read_dataset_csv(f);
}

}  // namespace saabo
