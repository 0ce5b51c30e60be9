#pragma once

#include <Eigen/Dense>
#include <utility>

#include "ctsid/model.hpp"
#include "ctsid/state_space.hpp"

namespace ctsid {

/// Discrete-time output-feedback controller u = C_d(q) e with e = r - y.
/// n_y inputs, n_u outputs, running at the data sampling interval h.
struct DiscreteController {
    StateSpace sys;  // Domain::Discrete

    Eigen::Index n_in() const { return sys.n_in(); }
    Eigen::Index n_out() const { return sys.n_out(); }
    double h() const { return sys.h; }

    void validate() const;
};

/// Realization of the input sensitivity S_uo(q) = C_d(I + G_d C_d)^{-1}
/// mapping the reference r to the noise-free plant input, built by state
/// augmentation of the ZOH-equivalent plant with the controller. Throws
/// ALGEBRAIC_LOOP when I + D_c D_g is singular and CL_UNSTABLE when the
/// interconnection has a pole on or outside the unit circle.
StateSpace control_sensitivity(const AdditiveModel& model, const DiscreteController& ctrl, double h);

/// z(t_k) = S_uo(q) r(t_k) from zero initial state.
Eigen::MatrixXd noiseless_input(const AdditiveModel& model, const DiscreteController& ctrl,
                                const Eigen::MatrixXd& r, double h);

/// Simulates the loop u = C_d(q)(r - y), y = G u + v as one interconnected
/// discrete system so that the logged u, y satisfy the loop equations
/// sample-for-sample. Returns (u, y).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> simulate_closed_loop(const AdditiveModel& model,
                                                                 const DiscreteController& ctrl,
                                                                 const Eigen::MatrixXd& r,
                                                                 const Eigen::MatrixXd& v, double h);

}  // namespace ctsid
