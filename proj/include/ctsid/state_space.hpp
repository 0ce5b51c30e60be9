#pragma once

#include <Eigen/Dense>

#include "ctsid/poly.hpp"

namespace ctsid {

/// State-space realization, either continuous-time or discrete-time.
/// Discrete systems carry the sampling interval h that produced them.
struct StateSpace {
    enum class Domain { Continuous, Discrete };

    Eigen::MatrixXd A, B, C, D;
    Domain domain = Domain::Continuous;
    double h = 0.0;  // only meaningful for Domain::Discrete

    Eigen::Index order() const { return A.rows(); }
    Eigen::Index n_in() const { return B.cols(); }
    Eigen::Index n_out() const { return C.rows(); }

    void check_consistent() const;
};

/// Controllable canonical realization of the proper SISO transfer function num/den.
/// Throws IMPROPER_FILTER when deg(num) > deg(den) and BAD_INPUT when the
/// denominator is the zero polynomial. Biproper fractions get the feedthrough
/// split off into D.
StateSpace siso_tf_to_ss(const ScalarPoly& num, const ScalarPoly& den);

/// Zero-order-hold discretization at step h via the exponential of the
/// augmented matrix [[A, B], [0, 0]]*h. C and D carry over unchanged.
StateSpace zoh_discretize(const StateSpace& sys, double h);

/// Runs the recursion x+ = A x + B u, y = C x + D u from x0 = 0 over the
/// rows of `input` (N x n_in). Requires a discrete-time system.
Eigen::MatrixXd dlsim(const StateSpace& sys, const Eigen::MatrixXd& input);

/// Applies the continuous-time filter num/den to each column of `input`
/// under the zero-order-hold reading of sampled data: the samples are held
/// across [t_k, t_k+h), the filter runs on that signal from zero initial
/// state, and the output is resampled on the same grid.
Eigen::MatrixXd filter_sampled(const ScalarPoly& num, const ScalarPoly& den,
                               const Eigen::MatrixXd& input, double h);

}  // namespace ctsid
