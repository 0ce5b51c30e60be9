#include "ctsid/closed_loop.hpp"

#include <Eigen/Eigenvalues>

#include "ctsid/errors.hpp"

namespace ctsid {

void DiscreteController::validate() const {
    sys.check_consistent();
    require(sys.domain == StateSpace::Domain::Discrete, ErrorCode::BAD_INPUT,
            "controller must be discrete-time");
    require(sys.h > 0.0, ErrorCode::BAD_INPUT, "controller sampling interval");
}

namespace {

struct LoopMatrices {
    // States [x_plant; x_ctrl]; E = (I + Dc Dg)^-1 resolves the direct feedthrough loop.
    Eigen::MatrixXd A, Bu_r, Bu_v;   // state update driven by r and v
    Eigen::MatrixXd Cu_x, Du_r, Du_v;  // u as output
    Eigen::MatrixXd Cy_x, Dy_r, Dy_v;  // y as output
    Eigen::Index n_plant = 0, n_ctrl = 0;
};

double spectral_radius(const Eigen::MatrixXd& A) {
    if (A.rows() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

LoopMatrices build_loop(const AdditiveModel& model, const DiscreteController& ctrl, double h) {
    ctrl.validate();
    require(std::abs(ctrl.sys.h - h) < 1e-12 * h, ErrorCode::BAD_INPUT,
            "controller and data sampling intervals differ");
    require(ctrl.n_in() == model.n_y() && ctrl.n_out() == model.n_u(), ErrorCode::DIM_MISMATCH,
            "controller dimensions do not match the plant");
    const StateSpace g = zoh_equivalent_dtf(model, h);
    const Eigen::MatrixXd& Ag = g.A;
    const Eigen::MatrixXd& Bg = g.B;
    const Eigen::MatrixXd& Cg = g.C;
    const Eigen::MatrixXd& Dg = g.D;
    const Eigen::MatrixXd& Ac = ctrl.sys.A;
    const Eigen::MatrixXd& Bc = ctrl.sys.B;
    const Eigen::MatrixXd& Cc = ctrl.sys.C;
    const Eigen::MatrixXd& Dc = ctrl.sys.D;
    const Eigen::Index ng = g.order(), nc = ctrl.sys.order();
    const Eigen::Index nu = model.n_u(), ny = model.n_y();

    const Eigen::MatrixXd loop_gain = Eigen::MatrixXd::Identity(nu, nu) + Dc * Dg;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(loop_gain);
    require(lu.isInvertible(), ErrorCode::ALGEBRAIC_LOOP,
            "direct feedthrough loop I + Dc*Dg is singular");
    const Eigen::MatrixXd E = lu.inverse();

    LoopMatrices L;
    L.n_plant = ng;
    L.n_ctrl = nc;
    // u = E(Cc xc + Dc(r - Cg xg - v))
    L.Cu_x.resize(nu, ng + nc);
    L.Cu_x << -E * Dc * Cg, E * Cc;
    L.Du_r = E * Dc;
    L.Du_v = -E * Dc;
    // y = Cg xg + Dg u + v
    L.Cy_x.resize(ny, ng + nc);
    L.Cy_x << Cg + Dg * L.Cu_x.leftCols(ng), Dg * L.Cu_x.rightCols(nc);
    L.Dy_r = Dg * L.Du_r;
    L.Dy_v = Eigen::MatrixXd::Identity(ny, ny) + Dg * L.Du_v;
    // xg+ = Ag xg + Bg u ; xc+ = Ac xc + Bc (r - y)
    L.A.resize(ng + nc, ng + nc);
    L.A.topRows(ng) << Ag + Bg * L.Cu_x.leftCols(ng), Bg * L.Cu_x.rightCols(nc);
    L.A.bottomRows(nc) << -Bc * L.Cy_x.leftCols(ng), Ac - Bc * L.Cy_x.rightCols(nc);
    L.Bu_r.resize(ng + nc, ny);
    L.Bu_r << Bg * L.Du_r, Bc * (Eigen::MatrixXd::Identity(ny, ny) - L.Dy_r);
    L.Bu_v.resize(ng + nc, ny);
    L.Bu_v << Bg * L.Du_v, -Bc * L.Dy_v;
    return L;
}

}  // namespace

StateSpace control_sensitivity(const AdditiveModel& model, const DiscreteController& ctrl, double h) {
    const LoopMatrices L = build_loop(model, ctrl, h);
    require(spectral_radius(L.A) < 1.0, ErrorCode::CL_UNSTABLE,
            "closed-loop interconnection is not stable");
    StateSpace s;
    s.A = L.A;
    s.B = L.Bu_r;
    s.C = L.Cu_x;
    s.D = L.Du_r;
    s.domain = StateSpace::Domain::Discrete;
    s.h = h;
    return s;
}

Eigen::MatrixXd noiseless_input(const AdditiveModel& model, const DiscreteController& ctrl,
                                const Eigen::MatrixXd& r, double h) {
    require(r.cols() == model.n_y(), ErrorCode::DIM_MISMATCH, "reference channel count");
    return dlsim(control_sensitivity(model, ctrl, h), r);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> simulate_closed_loop(const AdditiveModel& model,
                                                                 const DiscreteController& ctrl,
                                                                 const Eigen::MatrixXd& r,
                                                                 const Eigen::MatrixXd& v, double h) {
    require(r.cols() == model.n_y() && v.cols() == model.n_y(), ErrorCode::DIM_MISMATCH,
            "reference/noise channel count");
    require(r.rows() == v.rows(), ErrorCode::DIM_MISMATCH, "reference/noise length mismatch");
    const LoopMatrices L = build_loop(model, ctrl, h);
    require(spectral_radius(L.A) < 1.0, ErrorCode::CL_UNSTABLE,
            "closed-loop interconnection is not stable");
    const Eigen::Index N = r.rows();
    const Eigen::Index nu = model.n_u(), ny = model.n_y();
    Eigen::MatrixXd u(N, nu), y(N, ny);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(L.A.rows());
    Eigen::VectorXd xn(L.A.rows());
    for (Eigen::Index k = 0; k < N; ++k) {
        const auto rk = r.row(k).transpose();
        const auto vk = v.row(k).transpose();
        u.row(k) = (L.Cu_x * x + L.Du_r * rk + L.Du_v * vk).transpose();
        y.row(k) = (L.Cy_x * x + L.Dy_r * rk + L.Dy_v * vk).transpose();
        xn.noalias() = L.A * x + L.Bu_r * rk + L.Bu_v * vk;
        x.swap(xn);
    }
    return {std::move(u), std::move(y)};
}

}  // namespace ctsid
