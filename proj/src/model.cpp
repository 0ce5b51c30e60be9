#include "ctsid/model.hpp"

#include <cmath>

namespace ctsid {

int Subsystem::theta_dim() const {
    return n() + (m() + 1) * static_cast<int>(num.rows() * num.cols());
}

Eigen::VectorXd Subsystem::theta() const {
    const int nn = n();
    const int mm = m();
    const Eigen::Index ny = num.rows(), nu = num.cols();
    Eigen::VectorXd th(theta_dim());
    for (int j = 1; j <= nn; ++j) th(j - 1) = den.c[static_cast<size_t>(j)];
    Eigen::Index off = nn;
    for (int j = 0; j <= mm; ++j) {
        th.segment(off, ny * nu) = Eigen::Map<const Eigen::VectorXd>(num.coef[static_cast<size_t>(j)].data(), ny * nu);
        off += ny * nu;
    }
    return th;
}

Subsystem Subsystem::from_theta(const Eigen::VectorXd& theta, int n, int m, Eigen::Index n_y,
                                Eigen::Index n_u) {
    require(theta.size() == n + (m + 1) * n_y * n_u, ErrorCode::DIM_MISMATCH, "theta length");
    Subsystem s;
    std::vector<double> a(static_cast<size_t>(n) + 1);
    a[0] = 1.0;
    for (int j = 1; j <= n; ++j) a[static_cast<size_t>(j)] = theta(j - 1);
    s.den = ScalarPoly(std::move(a));
    std::vector<Eigen::MatrixXd> bs;
    Eigen::Index off = n;
    for (int j = 0; j <= m; ++j) {
        bs.push_back(Eigen::Map<const Eigen::MatrixXd>(theta.segment(off, n_y * n_u).data(), n_y, n_u));
        off += n_y * n_u;
    }
    s.num = MatrixPoly(std::move(bs));
    return s;
}

void Subsystem::validate() const {
    require(!den.c.empty() && den.c[0] == 1.0, ErrorCode::BAD_INPUT,
            "denominator constant coefficient must be exactly 1");
    require(num.rows() > 0 && num.cols() > 0, ErrorCode::DIM_MISMATCH, "empty numerator");
    require(m() <= n(), ErrorCode::IMPROPER_FILTER, "subsystem numerator degree exceeds denominator");
    // Coprimeness: the numerator must not vanish at a denominator root.
    for (const auto& root : poly_roots(den)) {
        double scale = 0.0;
        double val = 0.0;
        for (Eigen::Index r = 0; r < num.rows(); ++r)
            for (Eigen::Index c = 0; c < num.cols(); ++c) {
                const ScalarPoly e = num.entry(r, c);
                double mag = 0.0;
                for (double cc : e.c) mag = std::max(mag, std::abs(cc));
                scale = std::max(scale, mag);
                val = std::max(val, std::abs(e.eval(root)));
            }
        require(val > 1e-9 * (1.0 + scale), ErrorCode::NON_COPRIME,
                "numerator and denominator share a root");
    }
}

AdditiveModel::AdditiveModel(std::vector<Subsystem> subsystems) : subs(std::move(subsystems)) {
    require(!subs.empty(), ErrorCode::BAD_INPUT, "model needs at least one subsystem");
    const Eigen::Index ny = subs.front().num.rows();
    const Eigen::Index nu = subs.front().num.cols();
    int dynamic_biproper = 0;
    for (const auto& s : subs) {
        s.validate();
        require(s.num.rows() == ny && s.num.cols() == nu, ErrorCode::DIM_MISMATCH,
                "subsystems disagree on input/output dimensions");
        if (s.biproper() && s.n() >= 1) ++dynamic_biproper;
    }
    require(dynamic_biproper <= 1, ErrorCode::BAD_INPUT,
            "more than one biproper subsystem makes the decomposition non-unique");
    for (size_t i = 0; i < subs.size(); ++i)
        for (size_t j = i + 1; j < subs.size(); ++j)
            require(are_coprime(subs[i].den, subs[j].den), ErrorCode::NON_COPRIME,
                    "subsystem denominators share a root");
}

int AdditiveModel::beta_dim() const {
    int d = 0;
    for (const auto& s : subs) d += s.theta_dim();
    return d;
}

int AdditiveModel::theta_offset(int i) const {
    int off = 0;
    for (int k = 0; k < i; ++k) off += subs[static_cast<size_t>(k)].theta_dim();
    return off;
}

Eigen::VectorXd AdditiveModel::flatten() const {
    Eigen::VectorXd beta(beta_dim());
    Eigen::Index off = 0;
    for (const auto& s : subs) {
        beta.segment(off, s.theta_dim()) = s.theta();
        off += s.theta_dim();
    }
    return beta;
}

AdditiveModel AdditiveModel::unflatten(const Eigen::VectorXd& beta) const {
    require(beta.size() == beta_dim(), ErrorCode::DIM_MISMATCH, "beta length");
    AdditiveModel out;
    Eigen::Index off = 0;
    for (const auto& s : subs) {
        out.subs.push_back(Subsystem::from_theta(beta.segment(off, s.theta_dim()), s.n(), s.m(),
                                                 s.num.rows(), s.num.cols()));
        off += s.theta_dim();
    }
    return out;
}

bool AdditiveModel::same_structure(const AdditiveModel& other) const {
    if (subs.size() != other.subs.size() || n_u() != other.n_u() || n_y() != other.n_y())
        return false;
    for (size_t i = 0; i < subs.size(); ++i)
        if (subs[i].n() != other.subs[i].n() || subs[i].m() != other.subs[i].m()) return false;
    return true;
}

bool AdditiveModel::stable(double margin) const {
    for (const auto& s : subs)
        if (!is_hurwitz(s.den, margin)) return false;
    return true;
}

void AdditiveModel::validate_identifiable() const {
    int biproper = 0;
    for (const auto& s : subs)
        if (s.biproper()) ++biproper;
    require(biproper <= 1, ErrorCode::BAD_INPUT,
            "additive decomposition with repeated feedthrough is not identifiable");
}

StateSpace AdditiveModel::to_state_space() const {
    const Eigen::Index ny = n_y(), nu = n_u();
    Eigen::Index total = 0;
    for (const auto& s : subs) total += static_cast<Eigen::Index>(s.n()) * nu;
    StateSpace ss;
    ss.A = Eigen::MatrixXd::Zero(total, total);
    ss.B = Eigen::MatrixXd::Zero(total, nu);
    ss.C = Eigen::MatrixXd::Zero(ny, total);
    ss.D = Eigen::MatrixXd::Zero(ny, nu);
    Eigen::Index off = 0;
    for (const auto& s : subs) {
        for (Eigen::Index c = 0; c < nu; ++c) {
            // One canonical block per input channel; rows of C read off the
            // per-entry numerators toward each output.
            for (Eigen::Index r = 0; r < ny; ++r) {
                const StateSpace e = siso_tf_to_ss(s.num.entry(r, c), s.den);
                if (e.order() > 0) {
                    ss.A.block(off, off, e.order(), e.order()) = e.A;
                    ss.B.block(off, c, e.order(), 1) = e.B;
                    ss.C.block(r, off, 1, e.order()) = e.C;
                }
                ss.D(r, c) += e.D(0, 0);
            }
            off += s.n();
        }
    }
    ss.domain = StateSpace::Domain::Continuous;
    return ss;
}

Eigen::MatrixXcd AdditiveModel::freq_response(double omega) const {
    const std::complex<double> jw(0.0, omega);
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n_y(), n_u());
    for (const auto& s : subs) g += s.num.eval(jw) / s.den.eval(jw);
    return g;
}

AdditiveModel AdditiveModel::permuted(const std::vector<int>& perm) const {
    require(perm.size() == subs.size(), ErrorCode::BAD_INPUT, "permutation length");
    std::vector<bool> seen(subs.size(), false);
    for (int idx : perm) {
        require(idx >= 0 && static_cast<size_t>(idx) < subs.size() &&
                    !seen[static_cast<size_t>(idx)],
                ErrorCode::BAD_INPUT, "index list is not a permutation");
        seen[static_cast<size_t>(idx)] = true;
    }
    AdditiveModel out;
    for (int idx : perm) out.subs.push_back(subs.at(static_cast<size_t>(idx)));
    return out;
}

Eigen::MatrixXd simulate_subsystem(const Subsystem& sub, const Eigen::MatrixXd& u, double h) {
    const Eigen::Index ny = sub.num.rows();
    require(u.cols() == sub.num.cols(), ErrorCode::DIM_MISMATCH,
            "input channel count does not match the model");
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(u.rows(), ny);
    for (Eigen::Index r = 0; r < ny; ++r)
        for (Eigen::Index c = 0; c < u.cols(); ++c) {
            const ScalarPoly num = sub.num.entry(r, c);
            if (num.is_zero()) continue;
            y.col(r) += filter_sampled(num, sub.den, u.col(c), h).col(0);
        }
    return y;
}

Eigen::MatrixXd simulate_additive(const AdditiveModel& model, const Eigen::MatrixXd& u, double h) {
    require(u.cols() == model.n_u(), ErrorCode::DIM_MISMATCH,
            "input channel count does not match the model");
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(u.rows(), model.n_y());
    for (const auto& s : model.subs) y += simulate_subsystem(s, u, h);
    return y;
}

StateSpace zoh_equivalent_dtf(const AdditiveModel& model, double h) {
    const StateSpace ct = model.to_state_space();
    if (ct.order() == 0) {
        StateSpace s = ct;
        s.domain = StateSpace::Domain::Discrete;
        s.h = h;
        return s;
    }
    return zoh_discretize(ct, h);
}

Eigen::MatrixXcd dt_freq_response(const StateSpace& sys, double omega) {
    require(sys.domain == StateSpace::Domain::Discrete, ErrorCode::BAD_INPUT,
            "dt_freq_response expects a discrete-time system");
    const std::complex<double> z = std::exp(std::complex<double>(0.0, omega * sys.h));
    const Eigen::Index n = sys.order();
    if (n == 0) return sys.D.cast<std::complex<double>>();
    Eigen::MatrixXcd zi = z * Eigen::MatrixXcd::Identity(n, n) - sys.A.cast<std::complex<double>>();
    return sys.C.cast<std::complex<double>>() * zi.lu().solve(sys.B.cast<std::complex<double>>()) +
           sys.D.cast<std::complex<double>>();
}

}  // namespace ctsid
