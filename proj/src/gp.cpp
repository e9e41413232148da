#include "sfde/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sfde {

double Kernel::operator()(const Eigen::Ref<const Vector>& a,
                          const Eigen::Ref<const Vector>& b) const {
  return std::exp(-(a - b).squaredNorm() / (2.0 * lengthscale * lengthscale));
}

InputEncoding InputEncoding::for_mdp(const TabularMdp& mdp) {
  InputEncoding enc;
  enc.grid_ = mdp.grid();
  enc.num_states_ = mdp.num_states();
  enc.num_actions_ = mdp.num_actions();
  enc.state_dim_ = enc.grid_ ? 2 : mdp.num_states();
  return enc;
}

Vector InputEncoding::encode(int s, int a) const {
  require(s >= 0 && s < num_states_ && a >= 0 && a < num_actions_, ErrorKind::InvalidArgument,
          "state or action index out of range");
  Vector x = Vector::Zero(dim());
  if (grid_) {
    x(0) = static_cast<double>(grid_->row(s)) / (grid_->height - 1);
    x(1) = static_cast<double>(grid_->col(s)) / (grid_->width - 1);
  } else {
    x(s) = 1.0;
  }
  x(state_dim_ + a) = 1.0;
  return x;
}

void NoiseConfig::validate() const {
  require(sigma_sq >= 0.0 && sigma_s_sq >= 0.0 && std::isfinite(sigma_sq) &&
              std::isfinite(sigma_s_sq),
          ErrorKind::InvalidConfig, "noise variances must be finite and non-negative");
}

Matrix assemble_covariance(const Matrix& points, const Kernel& kernel) {
  require(kernel.lengthscale > 0.0, ErrorKind::InvalidArgument, "lengthscale must be positive");
  const Eigen::Index n = points.cols();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i) = kernel(points.col(i), points.col(j));
  }
  return k;
}

Matrix augment_noise(const Matrix& k, int n_source, int m_target, const NoiseConfig& noise) {
  noise.validate();
  require(n_source >= 0 && m_target >= 0 && k.rows() == n_source + m_target &&
              k.cols() == n_source + m_target,
          ErrorKind::ShapeMismatch, "covariance must be (n+m) x (n+m)");
  Matrix out = k;
  out.diagonal().head(n_source).array() += noise.sigma_s_sq + noise.sigma_sq;
  out.diagonal().tail(m_target).array() += noise.sigma_sq;
  return out;
}

void GpSfModel::reserve(int capacity) {
  if (capacity <= x_.cols()) return;
  const int cap = std::max({capacity, 16, 2 * static_cast<int>(x_.cols())});
  x_.conservativeResize(Eigen::NoChange, cap);
  y_.conservativeResize(cap, Eigen::NoChange);
  alpha_.conservativeResize(cap, Eigen::NoChange);
  Matrix l = Matrix::Zero(cap, cap);
  l.topLeftCorner(n_, n_) = l_.topLeftCorner(n_, n_);
  l_ = std::move(l);
}

GpSfModel GpSfModel::fit(const Matrix& source_x, const Matrix& source_y, const Matrix& target_x,
                         const Matrix& target_y, const Kernel& kernel, const NoiseConfig& noise) {
  noise.validate();
  require(kernel.lengthscale > 0.0, ErrorKind::InvalidArgument, "lengthscale must be positive");
  const int n = static_cast<int>(source_x.cols());
  const int m = static_cast<int>(target_x.cols());
  require(n + m > 0, ErrorKind::InvalidArgument, "GP needs at least one training point");
  require(source_y.rows() == n && target_y.rows() == m, ErrorKind::ShapeMismatch,
          "one target row per input column");
  require(n == 0 || m == 0 || source_x.rows() == target_x.rows(), ErrorKind::ShapeMismatch,
          "source and target inputs differ in dimension");
  require(n == 0 || m == 0 || source_y.cols() == target_y.cols(), ErrorKind::ShapeMismatch,
          "source and target outputs differ in dimension");
  const Eigen::Index in_dim = n > 0 ? source_x.rows() : target_x.rows();
  const Eigen::Index out_dim = n > 0 ? source_y.cols() : target_y.cols();

  GpSfModel model(kernel, noise);
  model.x_.resize(in_dim, 0);
  model.y_.resize(0, out_dim);
  model.alpha_.resize(0, out_dim);
  model.reserve(n + m);
  model.n_ = n + m;
  model.n_source_ = n;
  model.x_.leftCols(n) = source_x;
  model.x_.middleCols(n, m) = target_x;
  model.y_.topRows(n) = source_y;
  model.y_.middleRows(n, m) = target_y;

  const Matrix k_star = augment_noise(assemble_covariance(model.inputs(), kernel), n, m, noise);
  double jitter = 0.0;
  while (true) {
    Eigen::LLT<Matrix> llt(k_star + jitter * Matrix::Identity(n + m, n + m));
    if (llt.info() == Eigen::Success) {
      model.l_.topLeftCorner(n + m, n + m) = llt.matrixL();
      model.alpha_.topRows(n + m) = llt.solve(model.targets());
      break;
    }
    jitter = jitter == 0.0 ? kInitialJitter : jitter * 10.0;
    if (jitter > kMaxJitter * 1.000001)
      throw Error(ErrorKind::NotPositiveDefinite,
                  "covariance not positive definite after jitter up to 1e-6");
  }
  model.jitter_ = jitter;
  return model;
}

Vector GpSfModel::kernel_column(const Eigen::Ref<const Vector>& x) const {
  require(x.size() == x_.rows(), ErrorKind::ShapeMismatch, "query input has the wrong dimension");
  const double scale = -1.0 / (2.0 * kernel_.lengthscale * kernel_.lengthscale);
  return ((x_.leftCols(n_).colwise() - x).colwise().squaredNorm().array() * scale)
      .exp()
      .matrix()
      .transpose();
}

void GpSfModel::append_target(const Eigen::Ref<const Vector>& x,
                              const Eigen::Ref<const Vector>& y) {
  require(y.size() == y_.cols(), ErrorKind::ShapeMismatch, "target output has the wrong dimension");
  const Vector k = kernel_column(x);
  const auto l_old = l_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>();
  const Vector l_row = l_old.solve(k);
  const double schur = 1.0 + noise_.sigma_sq + jitter_ - l_row.squaredNorm();
  require(schur > 0.0, ErrorKind::NotPositiveDefinite,
          "appended point makes the covariance singular");
  const Vector b = l_old.transpose().solve(l_row);
  const Eigen::RowVectorXd last =
      (y.transpose() - k.transpose() * alpha_.topRows(n_)) / schur;

  reserve(n_ + 1);
  alpha_.topRows(n_).noalias() -= b * last;
  alpha_.row(n_) = last;
  l_.row(n_).head(n_) = l_row.transpose();
  l_(n_, n_) = std::sqrt(schur);
  x_.col(n_) = x;
  y_.row(n_) = y.transpose();
  ++n_;
}

void GpSfModel::relabel_targets(const Eigen::Ref<const Matrix>& y) {
  require(y.rows() == n_ - n_source_ && y.cols() == y_.cols(), ErrorKind::ShapeMismatch,
          "relabel needs one row per target point");
  y_.middleRows(n_source_, n_ - n_source_) = y;
  const auto l = cholesky().triangularView<Eigen::Lower>();
  alpha_.topRows(n_) = l.transpose().solve(l.solve(targets()));
}

Vector GpSfModel::posterior_mean(const Eigen::Ref<const Vector>& x) const {
  if (n_ == 0) return Vector::Zero(y_.cols());
  return alpha_.topRows(n_).transpose() * kernel_column(x);
}

Posterior GpSfModel::posterior(const Eigen::Ref<const Vector>& x) const {
  Posterior out;
  out.mean = posterior_mean(x);
  double variance = 1.0;
  if (n_ > 0) {
    const Vector v = cholesky().triangularView<Eigen::Lower>().solve(kernel_column(x));
    variance -= v.squaredNorm();
  }
  if (variance < 0.0) {
    if (variance < -1e-10)
      throw Error(ErrorKind::NumericalInstability,
                  "posterior variance " + std::to_string(variance) + " is negative");
    variance = 0.0;
  }
  out.variance = Vector::Constant(y_.cols(), variance);
  return out;
}

double GpSfModel::log_marginal_likelihood() const {
  const double fit_term = (targets().array() * coefficients().array()).sum();
  const double log_det = 2.0 * cholesky().diagonal().array().log().sum();
  const double dims = static_cast<double>(y_.cols());
  return -0.5 * fit_term - 0.5 * dims * log_det -
         0.5 * dims * n_ * std::log(2.0 * std::numbers::pi);
}

Matrix GpSfModel::noisy_covariance() const {
  Matrix k = augment_noise(assemble_covariance(inputs(), kernel_), n_source_, n_ - n_source_,
                           noise_);
  k.diagonal().array() += jitter_;
  return k;
}

std::vector<double> default_lengthscale_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(std::pow(10.0, -1.0 + 2.0 * i / 9.0));
  return grid;
}

Kernel optimize_hyperparams(const Matrix& source_x, const Matrix& source_y,
                            const Matrix& target_x, const Matrix& target_y,
                            const NoiseConfig& noise, const std::vector<double>& grid) {
  require(!grid.empty(), ErrorKind::InvalidArgument, "lengthscale grid is empty");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  Kernel best{sorted.front()};
  double best_lml = -std::numeric_limits<double>::infinity();
  for (double ell : sorted) {
    const Kernel kernel{ell};
    const double lml =
        GpSfModel::fit(source_x, source_y, target_x, target_y, kernel, noise)
            .log_marginal_likelihood();
    if (lml > best_lml) {
      best_lml = lml;
      best = kernel;
    }
  }
  return best;
}

}  // namespace sfde
