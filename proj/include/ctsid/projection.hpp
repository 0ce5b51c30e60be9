#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "ctsid/model.hpp"

namespace ctsid {

/// Differentiable map f: rho -> beta from a structured parametrization into
/// the additive-model parameter space.
class ParameterMap {
  public:
    virtual ~ParameterMap() = default;

    virtual Eigen::VectorXd eval(const Eigen::VectorXd& rho) const = 0;
    virtual Eigen::MatrixXd jacobian(const Eigen::VectorXd& rho) const = 0;
    virtual int dim_rho() const = 0;
    virtual int dim_beta() const = 0;
    virtual std::string name() const = 0;

    /// Maps rho to the canonical representative of its equivalence class.
    /// Identity for maps without internal gauge freedom.
    virtual Eigen::VectorXd normalize(const Eigen::VectorXd& rho) const { return rho; }
};

/// One vibration mode: G_i(p) = psi_l psi_r^T / (1 + 2(xi/omega) p + p^2/omega^2)
/// with 0 < xi < 1, omega > 0. Canonical gauge: ||psi_r|| = 1 with the first
/// nonzero entry of psi_r positive.
struct ModalMode {
    double xi = 0.0;
    double omega = 0.0;
    Eigen::VectorXd psi_l;  // n_y
    Eigen::VectorXd psi_r;  // n_u
};

struct ModalParams {
    std::vector<ModalMode> modes;

    int K() const { return static_cast<int>(modes.size()); }
    Eigen::Index n_y() const { return modes.empty() ? 0 : modes.front().psi_l.size(); }
    Eigen::Index n_u() const { return modes.empty() ? 0 : modes.front().psi_r.size(); }

    /// Chart vector [xi, omega, psi_l, psi_r] per mode, concatenated.
    Eigen::VectorXd pack() const;
    static ModalParams unpack(const Eigen::VectorXd& rho, int K, Eigen::Index n_y, Eigen::Index n_u);

    /// Applies the psi_r gauge (unit norm, sign) mode by mode.
    ModalParams normalized() const;

    void validate() const;
};

/// ParameterMap for a sum of K modes with fixed input/output dimensions.
/// Note the chart carries an exact one-parameter scale gauge per mode
/// (psi_l, psi_r) -> (c psi_l, psi_r/c), so the Jacobian is rank-deficient
/// by one per mode everywhere; consumers must tolerate that.
class ModalMap : public ParameterMap {
  public:
    ModalMap(int K, Eigen::Index n_y, Eigen::Index n_u) : K_(K), n_y_(n_y), n_u_(n_u) {}

    Eigen::VectorXd eval(const Eigen::VectorXd& rho) const override;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& rho) const override;
    int dim_rho() const override { return K_ * (2 + static_cast<int>(n_y_ + n_u_)); }
    int dim_beta() const override { return K_ * (2 + static_cast<int>(n_y_ * n_u_)); }
    std::string name() const override { return "modal"; }
    Eigen::VectorXd normalize(const Eigen::VectorXd& rho) const override;

    int K() const { return K_; }
    Eigen::Index n_y() const { return n_y_; }
    Eigen::Index n_u() const { return n_u_; }

  private:
    int K_;
    Eigen::Index n_y_, n_u_;
};

/// Builds the additive model f(rho): one second-order subsystem per mode with
/// denominator 1 + 2(xi/omega) p + (1/omega^2) p^2 and numerator psi_l psi_r^T.
AdditiveModel modal_eval(const ModalParams& params);

/// Analytic Jacobian of the packed modal chart, block diagonal across modes.
Eigen::MatrixXd modal_jacobian(const ModalParams& params);

/// Initial structured parameters from an unstructured estimate: per subsystem
/// omega = 1/sqrt(a_2), xi = a_1 omega/2, and the dominant SVD triple of B_0.
/// Throws NOT_OSCILLATORY for non-complex pole pairs and DEGENERATE_MODE for a
/// vanishing numerator.
ModalParams modal_init(const AdditiveModel& model);

struct ProjectionResult {
    Eigen::VectorXd rho_hat;
    Eigen::MatrixXd ps;    // covariance of the structured estimate, (J^T Q^-1 J)^-1 at rho_hat
    double cost = 0.0;
    bool converged = false;
    int iterations = 0;
    bool singular_jacobian = false;  // ps fell back to a pseudo-inverse
};

struct ProjectOptions {
    int max_iter = 200;
    // geometry-scale charts can have Jacobian entries around 1e-3, so the
    // gradient cutoff must sit well below machine-exact residual levels
    double grad_tol = 1e-14;
    double step_tol = 1e-12;
};

/// Weighted projection of beta_hat onto the range of the map: minimizes
/// 0.5*||beta_hat - f(rho)||^2 in the Q^-1 metric by Levenberg-damped
/// Gauss-Newton. Q must be symmetric positive definite (NOT_PD_WEIGHT).
ProjectionResult project(const Eigen::VectorXd& beta_hat, const Eigen::MatrixXd& Q,
                         const ParameterMap& map, const Eigen::VectorXd& rho0,
                         const ProjectOptions& opts = {});

/// Sandwich covariance of the weighted projection for arbitrary weight Q when
/// the estimate covariance is P:
///   (J^T Q^-1 J)^-1 J^T Q^-1 P Q^-1 J (J^T Q^-1 J)^-1.
/// With Q = P this collapses to (J^T P^-1 J)^-1.
Eigen::MatrixXd general_covariance(const Eigen::MatrixXd& J, const Eigen::MatrixXd& Q,
                                   const Eigen::MatrixXd& P);

}  // namespace ctsid
