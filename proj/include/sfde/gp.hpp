#pragma once

#include <vector>

#include "sfde/env.hpp"

namespace sfde {

/// Squared-exponential kernel with unit signal variance.
struct Kernel {
  double lengthscale = 1.0;

  double operator()(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) const;
};

/// Maps (s,a) to kernel inputs.
///
/// Grid MDPs use (row/(H-1), col/(W-1)) followed by a one-hot action; other MDPs
/// use a one-hot state followed by a one-hot action.
class InputEncoding {
 public:
  static InputEncoding for_mdp(const TabularMdp& mdp);

  Vector encode(int s, int a) const;
  int dim() const { return state_dim_ + num_actions_; }

 private:
  std::optional<GridShape> grid_;
  int num_states_ = 0;
  int num_actions_ = 0;
  int state_dim_ = 0;
};

struct NoiseConfig {
  double sigma_sq = 0.01;    // measurement noise, every sample
  double sigma_s_sq = 0.1;   // extra modelling noise, source samples only

  void validate() const;
};

/// Gram matrix of column-stacked points (E x N).
Matrix assemble_covariance(const Matrix& points, const Kernel& kernel);

/// Adds (sigma_s^2 + sigma^2) to the first n diagonal entries and sigma^2 to the last m.
Matrix augment_noise(const Matrix& k, int n_source, int m_target, const NoiseConfig& noise);

struct Posterior {
  Vector mean;
  // Identical across dimensions because every dimension shares K*.
  Vector variance;
};

/// Per-dimension GP over successor features sharing one factorization of K*.
///
/// Source points always precede target points. Target points can be appended
/// one at a time; the Cholesky factor and coefficients are extended in O(N^2)
/// and agree with a batch fit on the same data.
class GpSfModel {
 public:
  static constexpr double kInitialJitter = 1e-10;
  static constexpr double kMaxJitter = 1e-6;

  /// Inputs are column-stacked (E x N); targets are row-stacked (N x D).
  static GpSfModel fit(const Matrix& source_x, const Matrix& source_y, const Matrix& target_x,
                       const Matrix& target_y, const Kernel& kernel, const NoiseConfig& noise);

  void append_target(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

  /// Replaces the target-block outputs (num_target x D). Inputs and K* are unchanged,
  /// so only the coefficients are re-solved against the existing factor.
  void relabel_targets(const Eigen::Ref<const Matrix>& y);

  Posterior posterior(const Eigen::Ref<const Vector>& x) const;
  Vector posterior_mean(const Eigen::Ref<const Vector>& x) const;
  double log_marginal_likelihood() const;

  int num_source() const { return n_source_; }
  int num_target() const { return n_ - n_source_; }
  int size() const { return n_; }
  int output_dim() const { return static_cast<int>(y_.cols()); }
  int input_dim() const { return static_cast<int>(x_.rows()); }
  double jitter() const { return jitter_; }
  const Kernel& kernel() const { return kernel_; }
  const NoiseConfig& noise() const { return noise_; }

  auto inputs() const { return x_.leftCols(n_); }
  auto targets() const { return y_.topRows(n_); }
  auto cholesky() const { return l_.topLeftCorner(n_, n_); }
  auto coefficients() const { return alpha_.topRows(n_); }
  /// K* including any jitter that was added.
  Matrix noisy_covariance() const;

 private:
  GpSfModel(Kernel kernel, NoiseConfig noise) : kernel_(kernel), noise_(noise) {}
  void reserve(int capacity);
  Vector kernel_column(const Eigen::Ref<const Vector>& x) const;

  Kernel kernel_;
  NoiseConfig noise_;
  double jitter_ = 0.0;
  int n_ = 0;
  int n_source_ = 0;
  Matrix x_;
  Matrix y_;
  Matrix l_;
  Matrix alpha_;
};

/// Ten log-spaced lengthscales in [0.1, 10].
std::vector<double> default_lengthscale_grid();

/// Grid search over lengthscales by log marginal likelihood; ties go to the smaller value.
Kernel optimize_hyperparams(const Matrix& source_x, const Matrix& source_y,
                            const Matrix& target_x, const Matrix& target_y,
                            const NoiseConfig& noise, const std::vector<double>& grid);

}  // namespace sfde
