#include "ctsid/projection.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "ctsid/errors.hpp"

namespace ctsid {

Eigen::VectorXd ModalParams::pack() const {
    const Eigen::Index per = 2 + n_y() + n_u();
    Eigen::VectorXd rho(per * K());
    Eigen::Index off = 0;
    for (const auto& m : modes) {
        rho(off) = m.xi;
        rho(off + 1) = m.omega;
        rho.segment(off + 2, n_y()) = m.psi_l;
        rho.segment(off + 2 + n_y(), n_u()) = m.psi_r;
        off += per;
    }
    return rho;
}

ModalParams ModalParams::unpack(const Eigen::VectorXd& rho, int K, Eigen::Index n_y,
                                Eigen::Index n_u) {
    const Eigen::Index per = 2 + n_y + n_u;
    require(rho.size() == per * K, ErrorCode::DIM_MISMATCH, "rho length");
    ModalParams out;
    Eigen::Index off = 0;
    for (int i = 0; i < K; ++i) {
        ModalMode m;
        m.xi = rho(off);
        m.omega = rho(off + 1);
        m.psi_l = rho.segment(off + 2, n_y);
        m.psi_r = rho.segment(off + 2 + n_y, n_u);
        out.modes.push_back(std::move(m));
        off += per;
    }
    return out;
}

ModalParams ModalParams::normalized() const {
    ModalParams out = *this;
    for (auto& m : out.modes) {
        const double nrm = m.psi_r.norm();
        require(nrm > 0.0, ErrorCode::DEGENERATE_MODE, "zero right mode shape");
        double sign = 1.0;
        for (Eigen::Index k = 0; k < m.psi_r.size(); ++k) {
            if (m.psi_r(k) != 0.0) {
                sign = m.psi_r(k) > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        m.psi_r *= sign / nrm;
        m.psi_l *= sign * nrm;
    }
    return out;
}

void ModalParams::validate() const {
    for (const auto& m : modes) {
        require(m.omega > 0.0, ErrorCode::BAD_INPUT, "mode frequency must be positive");
        require(m.xi > 0.0 && m.xi < 1.0, ErrorCode::BAD_INPUT,
                "damping ratio must lie in (0, 1)");
        require(m.psi_l.size() == n_y() && m.psi_r.size() == n_u(), ErrorCode::DIM_MISMATCH,
                "mode shape length");
    }
}

AdditiveModel modal_eval(const ModalParams& params) {
    params.validate();
    std::vector<Subsystem> subs;
    for (const auto& m : params.modes) {
        Subsystem s;
        s.den = ScalarPoly{1.0, 2.0 * m.xi / m.omega, 1.0 / (m.omega * m.omega)};
        s.num = MatrixPoly({m.psi_l * m.psi_r.transpose()});
        subs.push_back(std::move(s));
    }
    return AdditiveModel(std::move(subs));
}

Eigen::MatrixXd modal_jacobian(const ModalParams& params) {
    // Differentiable wherever eval is defined, so only the eval-level checks
    // apply; full physical validation would reject transient iterates.
    const Eigen::Index ny = params.n_y(), nu = params.n_u();
    for (const auto& m : params.modes) {
        require(m.omega != 0.0, ErrorCode::BAD_INPUT, "zero mode frequency");
        require(m.psi_l.size() == ny && m.psi_r.size() == nu, ErrorCode::DIM_MISMATCH,
                "mode shape length");
    }
    const Eigen::Index beta_per = 2 + ny * nu;
    const Eigen::Index rho_per = 2 + ny + nu;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(beta_per * params.K(), rho_per * params.K());
    for (int i = 0; i < params.K(); ++i) {
        const auto& m = params.modes[static_cast<size_t>(i)];
        const Eigen::Index rb = beta_per * i, rc = rho_per * i;
        const double w = m.omega;
        J(rb, rc) = 2.0 / w;                    // d a1 / d xi
        J(rb, rc + 1) = -2.0 * m.xi / (w * w);  // d a1 / d omega
        J(rb + 1, rc + 1) = -2.0 / (w * w * w); // d a2 / d omega
        // vec(psi_l psi_r^T) derivative blocks, column-major vec.
        for (Eigen::Index c = 0; c < nu; ++c)
            for (Eigen::Index r = 0; r < ny; ++r) {
                const Eigen::Index row = rb + 2 + c * ny + r;
                J(row, rc + 2 + r) = m.psi_r(c);
                J(row, rc + 2 + ny + c) = m.psi_l(r);
            }
    }
    return J;
}

ModalParams modal_init(const AdditiveModel& model) {
    ModalParams out;
    for (const auto& s : model.subs) {
        require(s.n() == 2 && s.m() == 0, ErrorCode::BAD_INPUT,
                "modal initialization needs second-order strictly proper subsystems");
        const double a1 = s.den.c[1], a2 = s.den.c[2];
        require(a2 > 0.0, ErrorCode::NOT_OSCILLATORY, "nonpositive p^2 coefficient");
        require(a1 * a1 < 4.0 * a2, ErrorCode::NOT_OSCILLATORY,
                "denominator has a real pole pair");
        ModalMode m;
        m.omega = 1.0 / std::sqrt(a2);
        m.xi = 0.5 * a1 * m.omega;
        require(m.xi > 0.0, ErrorCode::NOT_OSCILLATORY, "nonpositive damping");
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.num.coef[0],
                                              Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double sv = svd.singularValues()(0);
        require(sv > 1e-14 * (1.0 + s.num.coef[0].norm()), ErrorCode::DEGENERATE_MODE,
                "vanishing numerator");
        m.psi_l = sv * svd.matrixU().col(0);
        m.psi_r = svd.matrixV().col(0);
        out.modes.push_back(std::move(m));
    }
    return out.normalized();
}

Eigen::VectorXd ModalMap::eval(const Eigen::VectorXd& rho) const {
    const ModalParams p = ModalParams::unpack(rho, K_, n_y_, n_u_);
    // Direct coefficient map; avoids model validation so the optimizer may
    // pass through transient non-physical iterates.
    const Eigen::Index beta_per = 2 + n_y_ * n_u_;
    Eigen::VectorXd beta(beta_per * K_);
    Eigen::Index off = 0;
    for (const auto& m : p.modes) {
        require(m.omega != 0.0, ErrorCode::BAD_INPUT, "zero mode frequency");
        beta(off) = 2.0 * m.xi / m.omega;
        beta(off + 1) = 1.0 / (m.omega * m.omega);
        Eigen::MatrixXd b0 = m.psi_l * m.psi_r.transpose();
        beta.segment(off + 2, n_y_ * n_u_) =
            Eigen::Map<const Eigen::VectorXd>(b0.data(), n_y_ * n_u_);
        off += beta_per;
    }
    return beta;
}

Eigen::MatrixXd ModalMap::jacobian(const Eigen::VectorXd& rho) const {
    return modal_jacobian(ModalParams::unpack(rho, K_, n_y_, n_u_));
}

Eigen::VectorXd ModalMap::normalize(const Eigen::VectorXd& rho) const {
    return ModalParams::unpack(rho, K_, n_y_, n_u_).normalized().pack();
}

ProjectionResult project(const Eigen::VectorXd& beta_hat, const Eigen::MatrixXd& Q,
                         const ParameterMap& map, const Eigen::VectorXd& rho0,
                         const ProjectOptions& opts) {
    require(beta_hat.size() == map.dim_beta(), ErrorCode::DIM_MISMATCH, "beta length");
    require(rho0.size() == map.dim_rho(), ErrorCode::DIM_MISMATCH, "rho length");
    require(Q.rows() == beta_hat.size() && Q.cols() == beta_hat.size(), ErrorCode::DIM_MISMATCH,
            "weight shape");
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (Q + Q.transpose()));
    require(llt.info() == Eigen::Success, ErrorCode::NOT_PD_WEIGHT,
            "weight matrix is not positive definite");
    const auto winv = [&](const Eigen::MatrixXd& Mat) -> Eigen::MatrixXd { return llt.solve(Mat); };
    const auto winv_v = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return llt.solve(v); };

    ProjectionResult res;
    Eigen::VectorXd rho = rho0;
    Eigen::VectorXd resid = beta_hat - map.eval(rho);
    double cost = 0.5 * resid.dot(winv_v(resid));
    double lambda = 1e-6;
    bool converged = false;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        const Eigen::MatrixXd J = map.jacobian(rho);
        const Eigen::MatrixXd WJ = winv(J);
        const Eigen::VectorXd grad = -J.transpose() * winv_v(resid);
        if (grad.norm() < opts.grad_tol * (1.0 + cost)) {
            converged = true;
            break;
        }
        const Eigen::MatrixXd JtWJ = J.transpose() * WJ;
        // Solve the damped step in the eigenbasis of J^T Q^-1 J and keep the
        // null directions (chart gauge freedoms) frozen; damping alone would
        // let rounding noise drive arbitrary motion along them.
        Eigen::JacobiSVD<Eigen::MatrixXd> step_svd(JtWJ,
                                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& ssv = step_svd.singularValues();
        const double strunc = 1e-12 * ssv(0);
        const Eigen::VectorXd gproj = step_svd.matrixV().transpose() * (-grad);
        // Levenberg damping: retry with a larger lambda whenever the step
        // does not decrease the cost.
        bool stepped = false;
        for (int tries = 0; tries < 60; ++tries) {
            Eigen::VectorXd coef = gproj;
            for (Eigen::Index k = 0; k < coef.size(); ++k)
                coef(k) = ssv(k) > strunc ? coef(k) / (ssv(k) + lambda) : 0.0;
            const Eigen::VectorXd step = step_svd.matrixV() * coef;
            if (!step.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            if (step.norm() < opts.step_tol * (1.0 + rho.norm())) {
                converged = true;
                break;
            }
            const Eigen::VectorXd rho_try = rho + step;
            bool in_domain = true;
            Eigen::VectorXd resid_try;
            try {
                resid_try = beta_hat - map.eval(rho_try);
            } catch (const Error&) {
                in_domain = false;  // left the chart's domain: shorten the step
            }
            if (in_domain) {
                const double cost_try = 0.5 * resid_try.dot(winv_v(resid_try));
                if (cost_try <= cost) {
                    rho = rho_try;
                    resid = resid_try;
                    cost = cost_try;
                    lambda = std::max(lambda * 0.25, 1e-12);
                    stepped = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!stepped) break;  // converged or damping exhausted
    }
    rho = map.normalize(rho);
    resid = beta_hat - map.eval(rho);
    cost = 0.5 * resid.dot(winv_v(resid));

    res.rho_hat = rho;
    res.cost = cost;
    res.converged = converged;
    res.iterations = it;

    const Eigen::MatrixXd J = map.jacobian(rho);
    const Eigen::MatrixXd JtWJ = J.transpose() * winv(J);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(JtWJ, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double tol = 1e-10 * sv(0);
    if (sv.minCoeff() <= tol) {
        res.singular_jacobian = true;
        Eigen::VectorXd inv_sv = sv;
        for (Eigen::Index k = 0; k < sv.size(); ++k)
            inv_sv(k) = sv(k) > tol ? 1.0 / sv(k) : 0.0;
        res.ps = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
    } else {
        res.ps = JtWJ.llt().solve(
            Eigen::MatrixXd::Identity(JtWJ.rows(), JtWJ.cols()));
    }
    res.ps = 0.5 * (res.ps + res.ps.transpose()).eval();
    return res;
}

Eigen::MatrixXd general_covariance(const Eigen::MatrixXd& J, const Eigen::MatrixXd& Q,
                                   const Eigen::MatrixXd& P) {
    require(J.rows() == Q.rows() && Q.rows() == Q.cols(), ErrorCode::DIM_MISMATCH, "weight shape");
    require(P.rows() == Q.rows() && P.cols() == Q.cols(), ErrorCode::DIM_MISMATCH,
            "covariance shape");
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (Q + Q.transpose()));
    require(llt.info() == Eigen::Success, ErrorCode::NOT_PD_WEIGHT,
            "weight matrix is not positive definite");
    const Eigen::MatrixXd WJ = llt.solve(J);              // Q^-1 J
    const Eigen::MatrixXd JtWJ = J.transpose() * WJ;      // J^T Q^-1 J
    Eigen::FullPivLU<Eigen::MatrixXd> lu(JtWJ);
    require(lu.isInvertible(), ErrorCode::SINGULAR_JACOBIAN, "J^T Q^-1 J is singular");
    const Eigen::MatrixXd Jplus = lu.solve(WJ.transpose());  // (J^T Q^-1 J)^-1 J^T Q^-1
    Eigen::MatrixXd out = Jplus * P * Jplus.transpose();
    return 0.5 * (out + out.transpose()).eval();
}

}  // namespace ctsid
