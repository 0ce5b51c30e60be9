#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ctsid/closed_loop.hpp"
#include "ctsid/dataset.hpp"
#include "ctsid/model.hpp"

namespace ctsid {

enum class LoopMode { Open, Closed };

/// Policy when an iterate produces a denominator with roots on or right of
/// the stability margin.
enum class UnstablePolicy { Reflect, Abort };

struct EstimatorOptions {
    int max_iter = 100;
    // floor set by the conditioned solve, not by arithmetic precision
    double rel_tol = 1e-7;
    double stability_margin = 0.0;
    LoopMode loop_mode = LoopMode::Open;
    UnstablePolicy on_unstable = UnstablePolicy::Reflect;
    /// Required for LoopMode::Closed: the controller that generated the data,
    /// used to rebuild the noise-free input from the reference each iteration.
    std::optional<DiscreteController> controller;

    void validate() const;
};

struct RivResult {
    AdditiveModel model;
    Eigen::MatrixXd sigma_hat;   // n_y x n_y innovation covariance estimate
    Eigen::MatrixXd acov;        // d x d estimate of N*Cov(beta_hat)
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;   // relative step norm per iteration
};

struct NoiseCovariance {
    Eigen::MatrixXd sigma;
    bool singular = false;  // min eigenvalue < 1e-12 * trace before regularization
};

/// Per-sample regression blocks for one subsystem, stored signal-wise:
/// phi[c] is N x theta_dim(i) holding the output-channel-c column of the
/// regressor across time; phi_hat[c] likewise for the instrument.
struct RegressionMatrices {
    std::vector<Eigen::MatrixXd> phi;
    std::vector<Eigen::MatrixXd> phi_hat;
    Eigen::MatrixXd upsilon;  // N x n_y filtered residual output for the subsystem
};

/// eps(t_k, beta) = y - sum_i G_i u under ZOH filtering semantics.
Eigen::MatrixXd residual(const AdditiveModel& model, const SampledDataset& ds);

/// ytilde_i = y - sum_{l != i} G_l u.
Eigen::MatrixXd subsystem_residual_output(const AdditiveModel& model, const SampledDataset& ds, int i);

/// Regressor block for subsystem i: denominator rows -(p^j/A_i) ytilde_i for
/// j = 1..n_i, then numerator rows (p^j/A_i) applied to the input Kronecker
/// lift for j = 0..m_i.
RegressionMatrices build_regressor(const AdditiveModel& model, const SampledDataset& ds, int i);

/// Instrument block for subsystem i, built from the noise-free input z
/// (z = u in open loop, z = S_uo(q, beta) r in closed loop): denominator rows
/// -(p^j B_i/A_i^2) z, numerator rows (p^j/A_i) on the lift of z.
RegressionMatrices build_instrument(const AdditiveModel& model, const SampledDataset& ds, int i,
                                    LoopMode mode,
                                    const std::optional<DiscreteController>& ctrl = std::nullopt);

/// Sample covariance (1/N) sum eps eps^T over the post-transient window.
/// Flags near-singular results (min eig < 1e-12 * trace).
NoiseCovariance noise_covariance(const Eigen::MatrixXd& eps);

/// One block-coordinate update: solves the full d x d correlation system at
/// the current model and extracts the block diagonal. Throws ILL_CONDITIONED
/// when the instrument-regressor Gram has 2-norm condition above 1e12, and
/// UNSTABLE_ITERATE under UnstablePolicy::Abort.
AdditiveModel riv_step(const AdditiveModel& model, const SampledDataset& ds,
                       const EstimatorOptions& opts);

/// Iterates riv_step to convergence in relative step norm. Non-convergence
/// within max_iter is reported through the result, not an error.
RivResult riv_solve(const AdditiveModel& model0, const SampledDataset& ds,
                    const EstimatorOptions& opts);

/// Sample version of the asymptotic covariance: inverse of the normalized
/// instrument Gram [(1/N) sum PhiHat Sigma^{-1} PhiHat^T]^{-1}.
Eigen::MatrixXd asymptotic_covariance(const AdditiveModel& model, const SampledDataset& ds,
                                      const Eigen::MatrixXd& sigma, const EstimatorOptions& opts);

/// Reorders the subsystems of `est` so each matches the nearest subsystem of
/// `ref` in parameter distance, permuting only within groups of equal orders.
/// Returns the permutation applied (est index = perm[ref position]).
std::vector<int> align_submodels(AdditiveModel& est, const AdditiveModel& ref);

/// Number of leading samples excluded from estimator sums: five times the
/// slowest model time constant, capped at a quarter of the record.
Eigen::Index transient_skip(const AdditiveModel& model, double h, Eigen::Index N);

}  // namespace ctsid
