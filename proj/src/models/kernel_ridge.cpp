#include "regraft/models/kernel_ridge.hpp"

#include <algorithm>

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "regraft/error.hpp"

namespace regraft::models {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> view(const nd::Tensor2& t) {
  return {t.values().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}

// exp(-|a_i - b_j|^2 / (2 sigma^2))
RowMatrix gaussian_gram(const nd::Tensor2& a, const nd::Tensor2& b, double sigma) {
  const auto A = view(a);
  const auto B = view(b);
  const Eigen::VectorXd an = A.rowwise().squaredNorm();
  const Eigen::VectorXd bn = B.rowwise().squaredNorm();
  RowMatrix k = -2.0 * (A * B.transpose());
  k.colwise() += an;
  k.rowwise() += bn.transpose();
  const double inv = -1.0 / (2.0 * sigma * sigma);
  k = (k.array().max(0.0) * inv).exp().matrix();
  return k;
}

}  // namespace

KernelRidgePredictor::KernelRidgePredictor(nd::Tensor2 support, std::vector<double> dual, double sigma,
                                           double lambda)
    : support_(std::move(support)), dual_(std::move(dual)), sigma_(sigma), lambda_(lambda) {
  if (dual_.size() != support_.rows()) {
    throw InvalidArgument("KernelRidgePredictor: " + std::to_string(dual_.size()) + " dual coefficients for " +
                          std::to_string(support_.rows()) + " support points");
  }
  if (!(sigma_ > 0.0)) throw InvalidArgument("KernelRidgePredictor: bandwidth must be positive");
  if (!(lambda_ >= 0.0)) throw InvalidArgument("KernelRidgePredictor: ridge must be >= 0");
}

nd::Tensor2 KernelRidgePredictor::predict(const nd::Tensor2& batch) const {
  if (batch.cols() != input_dim()) {
    throw InvalidArgument("krr: batch width " + std::to_string(batch.cols()) + " does not match input dimension " +
                          std::to_string(input_dim()));
  }
  const RowMatrix k = gaussian_gram(batch, support_, sigma_);
  const Eigen::Map<const Eigen::VectorXd> a(dual_.data(), static_cast<Eigen::Index>(dual_.size()));
  const Eigen::VectorXd out = k * a;
  return nd::Tensor2::column(std::vector<double>(out.data(), out.data() + out.size()));
}

KernelRidgePredictor krr_fit(const nd::Tensor2& x, const nd::Tensor2& y, double sigma, double lambda) {
  if (x.rows() < 1) throw InvalidArgument("krr_fit: need at least one point");
  if (y.rows() != x.rows() || y.cols() != 1) throw InvalidArgument("krr_fit: targets must be n x 1");
  if (!(sigma > 0.0)) throw InvalidArgument("krr_fit: bandwidth must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("krr_fit: ridge must be >= 0");
  RowMatrix k = gaussian_gram(x, x, sigma);
  k.diagonal().array() += lambda;
  const Eigen::Map<const Eigen::VectorXd> rhs(y.values().data(), static_cast<Eigen::Index>(y.rows()));
  // LDL^T keeps tiny systems exact (a single point gives a = y / (1 + lambda)).
  Eigen::LDLT<Eigen::MatrixXd> ldlt(k);
  const Eigen::VectorXd dvec = ldlt.vectorD();
  const double dmax = dvec.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(dvec.minCoeff() > 1e-13 * std::max(1.0, dmax) * static_cast<double>(k.rows()))) {
    throw NumericError("krr_fit: kernel system is singular or not positive definite; use a positive ridge");
  }
  const Eigen::VectorXd a = ldlt.solve(rhs);
  if (!a.allFinite()) throw NumericError("krr_fit: solution is not finite");
  return KernelRidgePredictor(x, std::vector<double>(a.data(), a.data() + a.size()), sigma, lambda);
}

}  // namespace regraft::models
