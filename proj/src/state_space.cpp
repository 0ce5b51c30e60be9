#include "ctsid/state_space.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace ctsid {

void StateSpace::check_consistent() const {
    require(A.rows() == A.cols(), ErrorCode::DIM_MISMATCH, "A not square");
    require(B.rows() == A.rows(), ErrorCode::DIM_MISMATCH, "B row count");
    require(C.cols() == A.rows(), ErrorCode::DIM_MISMATCH, "C column count");
    require(D.rows() == C.rows() && D.cols() == B.cols(), ErrorCode::DIM_MISMATCH, "D shape");
}

StateSpace siso_tf_to_ss(const ScalarPoly& num, const ScalarPoly& den) {
    require(!den.is_zero(), ErrorCode::BAD_INPUT, "zero denominator");
    const ScalarPoly a = den.trimmed();
    const ScalarPoly b = num.trimmed();
    const int n = a.degree();
    const int m = b.is_zero() ? 0 : b.degree();
    require(b.is_zero() || m <= n, ErrorCode::IMPROPER_FILTER,
            "numerator degree exceeds denominator degree");

    const double lead = a.c[static_cast<size_t>(n)];
    StateSpace ss;
    ss.domain = StateSpace::Domain::Continuous;
    ss.A = Eigen::MatrixXd::Zero(n, n);
    ss.B = Eigen::MatrixXd::Zero(n, 1);
    ss.C = Eigen::MatrixXd::Zero(1, n);
    ss.D = Eigen::MatrixXd::Zero(1, 1);

    double d = 0.0;
    std::vector<double> bc(b.c.begin(), b.c.end());
    bc.resize(static_cast<size_t>(n) + 1, 0.0);
    if (m == n && !b.is_zero()) {
        d = bc[static_cast<size_t>(n)] / lead;
        for (int i = 0; i <= n; ++i) bc[static_cast<size_t>(i)] -= d * a.c[static_cast<size_t>(i)];
    }
    ss.D(0, 0) = d;
    if (n == 0) return ss;

    for (int i = 0; i + 1 < n; ++i) ss.A(i, i + 1) = 1.0;
    for (int i = 0; i < n; ++i) ss.A(n - 1, i) = -a.c[static_cast<size_t>(i)] / lead;
    ss.B(n - 1, 0) = 1.0;
    for (int i = 0; i < n; ++i) ss.C(0, i) = bc[static_cast<size_t>(i)] / lead;
    return ss;
}

StateSpace zoh_discretize(const StateSpace& sys, double h) {
    sys.check_consistent();
    require(sys.domain == StateSpace::Domain::Continuous, ErrorCode::BAD_INPUT,
            "zoh_discretize expects a continuous-time system");
    require(h > 0.0, ErrorCode::BAD_INPUT, "nonpositive sampling interval");
    const Eigen::Index n = sys.order();
    const Eigen::Index nu = sys.n_in();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + nu, n + nu);
    aug.topLeftCorner(n, n) = sys.A;
    aug.topRightCorner(n, nu) = sys.B;
    const Eigen::MatrixXd e = (aug * h).exp();
    StateSpace out = sys;
    out.A = e.topLeftCorner(n, n);
    out.B = e.topRightCorner(n, nu);
    out.domain = StateSpace::Domain::Discrete;
    out.h = h;
    return out;
}

namespace {

// Recursion with stack-resident state for the small single-input single-output
// filters that dominate the estimator's work.
void siso_recursion(const StateSpace& d, const double* in, double* out, Eigen::Index N) {
    constexpr int kMax = 16;
    const int n = static_cast<int>(d.order());
    double x[kMax] = {0.0};
    double xn[kMax];
    const double* A = d.A.data();  // column-major
    const double* B = d.B.data();
    const double* C = d.C.data();
    const double D = d.D(0, 0);
    for (Eigen::Index k = 0; k < N; ++k) {
        const double u = in[k];
        double y = D * u;
        for (int i = 0; i < n; ++i) y += C[i] * x[i];
        out[k] = y;
        for (int i = 0; i < n; ++i) {
            double acc = B[i] * u;
            for (int j = 0; j < n; ++j) acc += A[i + j * n] * x[j];
            xn[i] = acc;
        }
        for (int i = 0; i < n; ++i) x[i] = xn[i];
    }
}

}  // namespace

Eigen::MatrixXd dlsim(const StateSpace& sys, const Eigen::MatrixXd& input) {
    sys.check_consistent();
    require(sys.domain == StateSpace::Domain::Discrete, ErrorCode::BAD_INPUT,
            "dlsim expects a discrete-time system");
    require(input.cols() == sys.n_in(), ErrorCode::DIM_MISMATCH, "input channel count");
    const Eigen::Index N = input.rows();
    Eigen::MatrixXd out(N, sys.n_out());
    if (sys.n_in() == 1 && sys.n_out() == 1 && sys.order() <= 16) {
        // Fast path; Eigen matrices of this size cost more in dispatch than math.
        Eigen::VectorXd col = input.col(0);
        siso_recursion(sys, col.data(), out.col(0).data(), N);
        return out;
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.order());
    Eigen::VectorXd xn(sys.order());
    for (Eigen::Index k = 0; k < N; ++k) {
        out.row(k).noalias() = (sys.C * x).transpose() + input.row(k) * sys.D.transpose();
        xn.noalias() = sys.A * x + sys.B * input.row(k).transpose();
        x.swap(xn);
    }
    return out;
}

Eigen::MatrixXd filter_sampled(const ScalarPoly& num, const ScalarPoly& den,
                               const Eigen::MatrixXd& input, double h) {
    const StateSpace ct = siso_tf_to_ss(num, den);
    const StateSpace dt = ct.order() == 0 ? [&] {
        StateSpace s = ct;
        s.domain = StateSpace::Domain::Discrete;
        s.h = h;
        return s;
    }()
                                          : zoh_discretize(ct, h);
    Eigen::MatrixXd out(input.rows(), input.cols());
    for (Eigen::Index c = 0; c < input.cols(); ++c)
        out.col(c) = dlsim(dt, input.col(c)).col(0);
    return out;
}

}  // namespace ctsid
