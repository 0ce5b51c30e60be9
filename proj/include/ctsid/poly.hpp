#pragma once

#include <Eigen/Dense>
#include <complex>
#include <initializer_list>
#include <vector>

#include "ctsid/errors.hpp"

namespace ctsid {

/// Real polynomial with coefficients stored in ascending degree order:
/// c[0] + c[1]*p + c[2]*p^2 + ...
/// The coefficient vector is always nonempty; trailing zeros are not trimmed
/// automatically so a polynomial can carry an explicit nominal degree.
struct ScalarPoly {
    std::vector<double> c;

    ScalarPoly() : c{0.0} {}
    ScalarPoly(std::initializer_list<double> coeffs) : c(coeffs) {
        require(!c.empty(), ErrorCode::BAD_INPUT, "polynomial needs at least one coefficient");
    }
    explicit ScalarPoly(std::vector<double> coeffs) : c(std::move(coeffs)) {
        require(!c.empty(), ErrorCode::BAD_INPUT, "polynomial needs at least one coefficient");
    }

    /// Degree after ignoring trailing zero coefficients. The zero polynomial has degree 0.
    int degree() const;

    /// Drops trailing zero coefficients (keeps at least one).
    ScalarPoly trimmed() const;

    bool is_zero() const;

    std::complex<double> eval(std::complex<double> p) const;
    double eval(double p) const;
};

ScalarPoly operator*(const ScalarPoly& a, const ScalarPoly& b);
ScalarPoly operator+(const ScalarPoly& a, const ScalarPoly& b);
ScalarPoly operator-(const ScalarPoly& a, const ScalarPoly& b);
ScalarPoly operator*(double s, const ScalarPoly& a);

/// p^k
ScalarPoly poly_power_of_p(int k);

/// Roots via eigenvalues of the companion matrix of the trimmed, leading-normalized
/// polynomial. Degree-zero polynomials have no roots (empty result).
std::vector<std::complex<double>> poly_roots(const ScalarPoly& a);

/// Reconstructs the polynomial with the given roots, scaled so the constant
/// coefficient equals 1. All roots must lie away from the origin and complex
/// roots must come in conjugate pairs (the imaginary parts are discarded after
/// pairing, so an unpaired complex root is a caller bug).
ScalarPoly poly_from_roots_unit_const(const std::vector<std::complex<double>>& roots);

/// True when every root satisfies Re(r) < -margin.
bool is_hurwitz(const ScalarPoly& a, double margin = 0.0);

/// True when the two polynomials share no root: min over root pairs of
/// |r_a - r_b| >= tol*(1 + |r_a|). Degree-zero polynomials are coprime with anything.
bool are_coprime(const ScalarPoly& a, const ScalarPoly& b, double tol = 1e-6);

/// Matrix-valued polynomial sum_j C[j]*p^j with all coefficient matrices the same shape.
struct MatrixPoly {
    std::vector<Eigen::MatrixXd> coef;  // ascending degree

    MatrixPoly() = default;
    explicit MatrixPoly(std::vector<Eigen::MatrixXd> coeffs);

    int degree() const { return static_cast<int>(coef.size()) - 1; }
    Eigen::Index rows() const { return coef.empty() ? 0 : coef.front().rows(); }
    Eigen::Index cols() const { return coef.empty() ? 0 : coef.front().cols(); }

    Eigen::MatrixXcd eval(std::complex<double> p) const;

    /// The scalar polynomial occupying entry (r, c) across all degrees.
    ScalarPoly entry(Eigen::Index r, Eigen::Index c) const;
};

}  // namespace ctsid
