#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ctsid/poly.hpp"
#include "ctsid/state_space.hpp"

namespace ctsid {

/// One additive term B_i(p)/A_i(p): scalar denominator with constant
/// coefficient exactly 1, matrix numerator of degree m_i <= n_i.
struct Subsystem {
    ScalarPoly den;   // 1 + a_1 p + ... + a_n p^n
    MatrixPoly num;   // B_0 + B_1 p + ... + B_m p^m, each B_j is n_y x n_u

    int n() const { return den.degree(); }
    int m() const { return num.degree(); }
    bool biproper() const { return m() == n(); }

    /// Parameter count n + (m+1)*n_u*n_y.
    int theta_dim() const;

    /// theta_i = [a_1..a_n, vec(B_0), ..., vec(B_m)] with column-major vec.
    Eigen::VectorXd theta() const;

    /// Rebuilds a subsystem with the same orders/shape from a theta vector.
    static Subsystem from_theta(const Eigen::VectorXd& theta, int n, int m,
                                Eigen::Index n_y, Eigen::Index n_u);

    void validate() const;
};

/// Sum of K subsystems sharing input/output dimensions. Denominators must be
/// pairwise coprime; at most one dynamic subsystem may be biproper (static
/// gains are tolerated at construction, but estimation rejects duplicated
/// feedthrough since the decomposition is no longer unique).
struct AdditiveModel {
    std::vector<Subsystem> subs;

    AdditiveModel() = default;
    explicit AdditiveModel(std::vector<Subsystem> subsystems);

    int K() const { return static_cast<int>(subs.size()); }
    Eigen::Index n_y() const { return subs.empty() ? 0 : subs.front().num.rows(); }
    Eigen::Index n_u() const { return subs.empty() ? 0 : subs.front().num.cols(); }

    int beta_dim() const;
    /// Offset of theta_i inside beta.
    int theta_offset(int i) const;

    /// beta = [theta_1; ...; theta_K].
    Eigen::VectorXd flatten() const;

    /// Inverse of flatten for the same structure (orders taken from *this).
    AdditiveModel unflatten(const Eigen::VectorXd& beta) const;

    bool same_structure(const AdditiveModel& other) const;

    /// All denominators Hurwitz with the given margin.
    bool stable(double margin = 0.0) const;

    /// Enforces the uniqueness conditions needed for identification:
    /// at most one biproper subsystem of any order.
    void validate_identifiable() const;

    /// Block-diagonal continuous-time realization (one controllable-canonical
    /// block per subsystem and input channel; static gains go into D).
    StateSpace to_state_space() const;

    /// G(jw) = sum_i B_i(jw)/A_i(jw).
    Eigen::MatrixXcd freq_response(double omega) const;

    AdditiveModel permuted(const std::vector<int>& perm) const;
};

/// Response of the model to sampled input (N x n_u) under the zero-order-hold
/// reading, evaluated as the sum over subsystems of per-entry SISO filters.
Eigen::MatrixXd simulate_additive(const AdditiveModel& model, const Eigen::MatrixXd& u, double h);

/// Response of a single subsystem, same semantics.
Eigen::MatrixXd simulate_subsystem(const Subsystem& sub, const Eigen::MatrixXd& u, double h);

/// Discrete-time equivalent of the full model at step h (exact under ZOH input).
StateSpace zoh_equivalent_dtf(const AdditiveModel& model, double h);

/// Discrete frequency response C(zI-A)^{-1}B + D at z = e^{j*omega*h}.
Eigen::MatrixXcd dt_freq_response(const StateSpace& sys, double omega);

}  // namespace ctsid
