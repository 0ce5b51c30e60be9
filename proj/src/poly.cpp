#include "ctsid/poly.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace ctsid {

int ScalarPoly::degree() const {
    for (int k = static_cast<int>(c.size()) - 1; k > 0; --k)
        if (c[static_cast<size_t>(k)] != 0.0) return k;
    return 0;
}

ScalarPoly ScalarPoly::trimmed() const {
    ScalarPoly out = *this;
    out.c.resize(static_cast<size_t>(degree()) + 1);
    return out;
}

bool ScalarPoly::is_zero() const {
    return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
}

std::complex<double> ScalarPoly::eval(std::complex<double> p) const {
    std::complex<double> acc(0.0, 0.0);
    for (size_t k = c.size(); k-- > 0;) acc = acc * p + c[k];
    return acc;
}

double ScalarPoly::eval(double p) const {
    double acc = 0.0;
    for (size_t k = c.size(); k-- > 0;) acc = acc * p + c[k];
    return acc;
}

ScalarPoly operator*(const ScalarPoly& a, const ScalarPoly& b) {
    std::vector<double> out(a.c.size() + b.c.size() - 1, 0.0);
    for (size_t i = 0; i < a.c.size(); ++i)
        for (size_t j = 0; j < b.c.size(); ++j) out[i + j] += a.c[i] * b.c[j];
    return ScalarPoly(std::move(out));
}

ScalarPoly operator+(const ScalarPoly& a, const ScalarPoly& b) {
    std::vector<double> out(std::max(a.c.size(), b.c.size()), 0.0);
    for (size_t i = 0; i < a.c.size(); ++i) out[i] += a.c[i];
    for (size_t i = 0; i < b.c.size(); ++i) out[i] += b.c[i];
    return ScalarPoly(std::move(out));
}

ScalarPoly operator-(const ScalarPoly& a, const ScalarPoly& b) { return a + (-1.0 * b); }

ScalarPoly operator*(double s, const ScalarPoly& a) {
    ScalarPoly out = a;
    for (double& v : out.c) v *= s;
    return out;
}

ScalarPoly poly_power_of_p(int k) {
    require(k >= 0, ErrorCode::BAD_INPUT, "negative power of p");
    std::vector<double> c(static_cast<size_t>(k) + 1, 0.0);
    c.back() = 1.0;
    return ScalarPoly(std::move(c));
}

std::vector<std::complex<double>> poly_roots(const ScalarPoly& a) {
    const ScalarPoly t = a.trimmed();
    const int n = t.degree();
    if (n == 0) return {};
    // Companion matrix of the monic normalization.
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    const double lead = t.c[static_cast<size_t>(n)];
    for (int i = 0; i + 1 < n; ++i) comp(i + 1, i) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -t.c[static_cast<size_t>(i)] / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> roots(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) roots[static_cast<size_t>(i)] = es.eigenvalues()(i);
    std::sort(roots.begin(), roots.end(), [](const auto& x, const auto& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return roots;
}

ScalarPoly poly_from_roots_unit_const(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> coef{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(coef.size() + 1, 0.0);
        for (size_t i = 0; i < coef.size(); ++i) {
            next[i + 1] += coef[i];
            next[i] -= coef[i] * r;
        }
        coef = std::move(next);
    }
    require(std::abs(coef[0]) > 0.0, ErrorCode::BAD_INPUT,
            "root at the origin, cannot normalize constant coefficient to 1");
    std::vector<double> out(coef.size());
    for (size_t i = 0; i < coef.size(); ++i) out[i] = (coef[i] / coef[0]).real();
    return ScalarPoly(std::move(out));
}

bool is_hurwitz(const ScalarPoly& a, double margin) {
    for (const auto& r : poly_roots(a))
        if (r.real() >= -margin) return false;
    return true;
}

bool are_coprime(const ScalarPoly& a, const ScalarPoly& b, double tol) {
    const auto ra = poly_roots(a);
    const auto rb = poly_roots(b);
    for (const auto& x : ra)
        for (const auto& y : rb)
            if (std::abs(x - y) < tol * (1.0 + std::abs(x))) return false;
    return true;
}

MatrixPoly::MatrixPoly(std::vector<Eigen::MatrixXd> coeffs) : coef(std::move(coeffs)) {
    require(!coef.empty(), ErrorCode::BAD_INPUT, "matrix polynomial needs at least one coefficient");
    for (const auto& m : coef)
        require(m.rows() == coef.front().rows() && m.cols() == coef.front().cols(),
                ErrorCode::DIM_MISMATCH, "matrix polynomial coefficients differ in shape");
}

Eigen::MatrixXcd MatrixPoly::eval(std::complex<double> p) const {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rows(), cols());
    for (size_t k = coef.size(); k-- > 0;) acc = acc * p + coef[k];
    return acc;
}

ScalarPoly MatrixPoly::entry(Eigen::Index r, Eigen::Index c) const {
    std::vector<double> out(coef.size());
    for (size_t k = 0; k < coef.size(); ++k) out[k] = coef[k](r, c);
    return ScalarPoly(std::move(out));
}

}  // namespace ctsid
