#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sfde/dp.hpp"
#include "sfde/gp.hpp"

namespace sfde {

inline constexpr double kSlackTolerance = 1e-9;

struct BoundRow {
  int s = 0;
  int a = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  // Reward-gap, dynamics-gap and estimation-error contributions to rhs.
  double term1 = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;
};

/// Per-pair LHS <= RHS certificate. A row violates when slack < -kSlackTolerance.
struct BoundReport {
  std::string name;
  std::vector<BoundRow> rows;
  int violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::string, double>> parameters;
  // False when an assumption of the bound did not hold for this instance.
  bool precondition_met = true;

  void add(BoundRow row);
  bool passed() const { return violations == 0; }
};

/// max over (s,a) of |r_i(s,a) - r_j(s,a)|.
double delta_ij(const TabularMdp& mdp_i, const TabularMdp& mdp_j);

struct Theorem1Report {
  // Dynamics term over (1-gamma)^2, as stated.
  BoundReport printed;
  // Dynamics term over (1-gamma), as in the derivation.
  BoundReport sketch;
};

/// LHS(s,a) = Q_i^{pi_i*}(s,a) - Q_i^{pi_j*}(s,a) against the reward and dynamics gap bound.
Theorem1Report theorem1_bound(const TabularMdp& mdp_i, const TabularMdp& mdp_j);

struct BoundInputs {
  double delta = 0.1;
  int m = 1;
  int x_space_size = 1;

  double u_m() const;
  void validate() const;
};

/// sqrt(2 log(|X| u_m / delta)) * sigma.
double lemma1_epsilon(const BoundInputs& inputs, double sigma);

struct Lemma2Params {
  double a = 1.0;
  double b = 1.0;
  double r = 1.0;
  double L = 1.0;
};

struct Lemma2Result {
  double epsilon = 0.0;
  double tau_m = 0.0;
};

Lemma2Result lemma2_epsilon(int m, double delta, const Lemma2Params& params, double sigma);

/// GP reconstruction of Q = mu^T w with its posterior standard deviation, both S x A.
struct GpQEstimate {
  Matrix q;
  Matrix sigma;
};

GpQEstimate estimate_q(const GpSfModel& model, const InputEncoding& encoding,
                       const TabularMdp& mdp, const Vector& w);

/// Lemma 1 radius on Q: max over (s,a) of epsilon(sigma(s,a)) * ||w||_1.
///
/// Every feature dimension shares sigma, so |psi^T w - mu^T w| <= ||w||_1 max_d |psi_d - mu_d|.
double lemma1_q_radius(const BoundInputs& inputs, const Matrix& sigma, const Vector& w);

struct CoverageOptions {
  int m = 32;
  NoiseConfig noise{0.01, 0.1};
  // Label noise actually added to sampled targets; defaults to noise.sigma_sq.
  double label_noise_sq = -1.0;
  // Include the exact SFs of every pair as extra source points.
  bool include_source = false;
  // Fixed lengthscale; non-positive selects by marginal likelihood on each trial.
  double lengthscale = 0.0;
};

struct CoverageResult {
  int trials = 0;
  int covered = 0;
  double fraction = 0.0;
  double max_ratio = 0.0;
  bool skipped = false;
  std::string diagnostic;
};

/// Fraction of resampled trials in which |Q - Q~| <= epsilon(m) holds at every (s,a).
CoverageResult lemma1_coverage_test(const TabularMdp& mdp, const Policy& policy,
                                    const Vector& w_true, double delta, int trials,
                                    const CoverageOptions& options, Rng& rng);

struct GpTransferEstimate {
  Matrix q;
  Matrix sigma;
  // Lemma 1 radius on q at the configured delta.
  double epsilon = 0.0;
};

/// GP reconstruction of Q_target^pi: exact SFs of pi in the source as source
/// points plus m noisy samples of the target SFs, drawn uniformly over pairs.
GpTransferEstimate gp_transfer_estimate(const TabularMdp& target, const TabularMdp& source,
                                        const Policy& pi, const Vector& w, int m,
                                        double lengthscale, double delta,
                                        const NoiseConfig& noise, Rng& rng);

/// Q^pi >= max_i Q^{pi_i} - 2 eps/(1-gamma) for the GPI policy over q_tilde.
BoundReport remark1_check(const TabularMdp& target, const std::vector<Policy>& policies,
                          const std::vector<Matrix>& q_tilde, double epsilon_m);

/// Greedy policy over max_i q_tilde[i] (ties to the lowest action).
Policy gpi_policy(const std::vector<Matrix>& q_tilde);

/// LHS(s,a) = Q*_T(s,a) - Q~_T^{pi_j}(s,a) against the reward, dynamics and
/// estimation terms. Target and source share the feature map.
BoundReport theorem2_bound(const TabularMdp& target, const TabularMdp& source_j,
                           const Policy& pi_j, const Vector& w_tilde, const Matrix& q_tilde_j,
                           double epsilon_m);

}  // namespace sfde
