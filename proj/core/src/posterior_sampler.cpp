#include "saabo/posterior_sampler.hpp"

#include "saabo/errors.hpp"
#include "saabo/linalg.hpp"

#include <string>

namespace saabo {

JointSampler::JointSampler(const ModelList& models, const MatrixXd& Z, const MatrixXd& E)
    : models_(models), Z_(Z), E_(E) {
  const Eigen::Index q = Z.rows();
  const auto m = static_cast<Eigen::Index>(models.num_outputs());
  if (E.cols() != q * m) {
    throw ShapeError("base samples have " + std::to_string(E.cols()) + " columns but the joint posterior has " +
                     std::to_string(q * m) + " dimensions; frozen samples must match the candidate set");
  }
  xi_.resize(E.rows(), q * m);
  outs_.resize(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    const GPModel& model = models[static_cast<std::size_t>(j)];
    Output& o = outs_[static_cast<std::size_t>(j)];
    o.mean = model.posterior_mean(Z);
    o.cc = model.posterior_cross_cov(Z, Z);
    const MatrixXd S = 0.5 * (o.cc.value + o.cc.value.transpose());
    o.L = root_decomposition(S);
    auto block = xi_.middleCols(j * q, q);
    block.noalias() = E.middleCols(j * q, q) * o.L.transpose();
    block.rowwise() += o.mean.transpose();
  }
}

void JointSampler::backward(const MatrixXd& G, MatrixXd& gZ) const {
  const Eigen::Index q = Z_.rows();
  for (std::size_t j = 0; j < outs_.size(); ++j) {
    const Output& o = outs_[j];
    const auto Gj = G.middleCols(static_cast<Eigen::Index>(j) * q, q);
    const GPModel& model = models_[j];
    const VectorXd gmu = Gj.colwise().sum().transpose();
    model.mean_vjp(Z_, gmu, gZ);
    const MatrixXd gL = lower_part(Gj.transpose() * E_.middleCols(static_cast<Eigen::Index>(j) * q, q));
    const MatrixXd gS = cholesky_backward(o.L, gL);
    model.cross_cov_vjp(Z_, Z_, o.cc, gS, &gZ, &gZ);
  }
}

}  // namespace saabo
