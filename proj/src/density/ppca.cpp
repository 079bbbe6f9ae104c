#include "tabood/density/ppca.hpp"

#include "tabood/error.hpp"

#include <Eigen/SVD>
#include <Eigen/QR>
#include <cmath>
#include <numbers>

namespace tabood::density {

Matrix PpcaModel::covariance() const {
  const auto d = mean.size();
  return loadings * loadings.transpose() + sigma2 * Matrix::Identity(d, d);
}

PpcaModel make_ppca(RowVector mean, Matrix loadings, double sigma2) {
  if (!(sigma2 > 0)) throw InvalidArgument("ppca: noise variance must be positive");
  if (loadings.rows() != mean.size()) throw InvalidArgument("ppca: loading matrix does not match the mean");
  PpcaModel m;
  m.mean = std::move(mean);
  m.loadings = std::move(loadings);
  m.sigma2 = sigma2;
  const Eigen::Index q = m.loadings.cols();
  const Eigen::Index d = m.mean.size();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(m.loadings));
  m.basis = qr.householderQ() * Eigen::MatrixXd::Identity(d, q);
  const Matrix r = m.basis.transpose() * m.loadings;
  const Matrix core = r * r.transpose() + sigma2 * Matrix::Identity(q, q);
  const Eigen::LLT<Matrix> llt(core);
  if (llt.info() != Eigen::Success) throw IllConditionedStats("ppca: latent covariance is not positive definite");
  m.core_inverse = llt.solve(Matrix::Identity(q, q));
  double log_det_m = 0.0;
  for (Eigen::Index i = 0; i < q; ++i) log_det_m += 2.0 * std::log(llt.matrixL()(i, i));
  m.log_det = static_cast<double>(d - q) * std::log(sigma2) + log_det_m;
  return m;
}

PpcaModel fit_ppca(const Matrix& x, int q) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (q < 1 || q >= d) throw InvalidArgument("fit_ppca: need 1 <= q < d");
  if (n == 0) throw InvalidArgument("fit_ppca: empty data");
  const RowVector mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - mean;
  // covariance eigenpairs from the SVD of the centered data
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(centered / std::sqrt(static_cast<double>(n))),
                                           Eigen::ComputeThinV);
  Vector lambda = Vector::Zero(d);
  const Eigen::Index k = svd.singularValues().size();
  lambda.head(k) = svd.singularValues().array().square().matrix();
  Matrix vectors(d, d);
  vectors.leftCols(k) = svd.matrixV();
  if (k < d) {
    // n < d: complete the basis of the null space
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(vectors.leftCols(k)));
    const Eigen::MatrixXd full = qr.householderQ();
    vectors.rightCols(d - k) = full.rightCols(d - k);
  }
  lambda = lambda.cwiseMax(kEigenFloor);
  const double sigma2 = std::max(lambda.tail(d - q).mean(), kEigenFloor);
  Matrix w = vectors.leftCols(q);
  for (Eigen::Index i = 0; i < q; ++i) w.col(i) *= std::sqrt(std::max(lambda(i) - sigma2, 0.0));
  PpcaModel m = make_ppca(mean, std::move(w), sigma2);
  m.eigenvalues = lambda;
  m.eigenvectors = vectors;
  return m;
}

Vector ppca_novelty(const PpcaModel& model, const Matrix& x) {
  if (x.cols() != model.mean.size()) throw InvalidArgument("ppca_novelty: dimension mismatch");
  const double d = static_cast<double>(x.cols());
  const Matrix centered = x.rowwise() - model.mean;
  // split into the loading span and its complement; the residual is formed
  // explicitly so a small sigma2 does not amplify cancellation
  const Matrix proj = centered * model.basis;  // (n, q)
  const Matrix residual = centered - proj * model.basis.transpose();
  const Vector inner = (proj * model.core_inverse).cwiseProduct(proj).rowwise().sum();
  const Vector quad = residual.rowwise().squaredNorm() / model.sigma2 + inner;
  return (0.5 * (d * std::log(2.0 * std::numbers::pi) + model.log_det + quad.array())).matrix();
}

}  // namespace tabood::density
