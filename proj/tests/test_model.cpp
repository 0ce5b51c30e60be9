#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ctsid/harness.hpp"
#include "ctsid/model.hpp"

using namespace ctsid;

namespace {

Subsystem make_mode(double a1, double a2, const Eigen::MatrixXd& b0) {
    Subsystem s;
    s.den = ScalarPoly{1.0, a1, a2};
    s.num = MatrixPoly(std::vector<Eigen::MatrixXd>{b0});
    return s;
}

AdditiveModel two_mode_model() {
    Eigen::MatrixXd b1(2, 2), b2(2, 2);
    b1 << 1.0, 0.5, 0.5, 0.25;
    b2 << 0.2, -0.1, 0.3, 0.4;
    return AdditiveModel({make_mode(0.2, 0.04, b1), make_mode(0.05, 0.01, b2)});
}

}  // namespace

TEST_CASE("theta layout and round trip are exact") {
    const AdditiveModel m = two_mode_model();
    CHECK(m.beta_dim() == 2 * (2 + 4));
    const Eigen::VectorXd th = m.subs[0].theta();
    REQUIRE(th.size() == 6);
    CHECK(th(0) == 0.2);
    CHECK(th(1) == 0.04);
    // column-major vec of B_0
    CHECK(th(2) == 1.0);
    CHECK(th(3) == 0.5);
    CHECK(th(4) == 0.5);
    CHECK(th(5) == 0.25);
    const Subsystem back = Subsystem::from_theta(th, 2, 0, 2, 2);
    CHECK(back.theta() == th);

    const Eigen::VectorXd beta = m.flatten();
    const AdditiveModel m2 = m.unflatten(beta);
    CHECK(m2.flatten() == beta);
}

TEST_CASE("validation rejects malformed subsystems") {
    Eigen::MatrixXd b(1, 1);
    b << 1.0;
    Subsystem s;
    s.den = ScalarPoly{2.0, 1.0};  // constant coefficient must be exactly 1
    s.num = MatrixPoly(std::vector<Eigen::MatrixXd>{b});
    CHECK_THROWS_AS(s.validate(), Error);

    // numerator degree above denominator degree
    Subsystem imp;
    imp.den = ScalarPoly{1.0, 1.0};
    imp.num = MatrixPoly(std::vector<Eigen::MatrixXd>{b, b, b});
    CHECK_THROWS_AS(imp.validate(), Error);

    // shared root between numerator and denominator: (1+p) over (1+p)(1+0.5p)
    Subsystem nc;
    nc.den = ScalarPoly{1.0, 1.0} * ScalarPoly{1.0, 0.5};
    Eigen::MatrixXd n0(1, 1), n1(1, 1);
    n0 << 1.0;
    n1 << 1.0;
    nc.num = MatrixPoly(std::vector<Eigen::MatrixXd>{n0, n1});
    CHECK_THROWS_AS(nc.validate(), Error);
}

TEST_CASE("model construction enforces additive uniqueness") {
    Eigen::MatrixXd b(1, 1);
    b << 1.0;
    Subsystem lag1, lag1_dup, gain1, gain2, bip;
    lag1.den = ScalarPoly{1.0, 1.0};
    lag1.num = MatrixPoly(std::vector<Eigen::MatrixXd>{b});
    lag1_dup = lag1;
    gain1.den = ScalarPoly{1.0};
    gain1.num = MatrixPoly(std::vector<Eigen::MatrixXd>{b});
    gain2 = gain1;
    bip.den = ScalarPoly{1.0, 0.5};
    bip.num = MatrixPoly(std::vector<Eigen::MatrixXd>{b, b});

    // shared denominator roots across subsystems
    CHECK_THROWS_AS(AdditiveModel({lag1, lag1_dup}), Error);
    // one dynamic biproper term is fine
    CHECK_NOTHROW(AdditiveModel({lag1, bip}));
    // static gains are representable at construction time
    const AdditiveModel gains({gain1, lag1});
    CHECK(gains.K() == 2);
    // but two flat feedthrough terms can never be told apart when estimating
    AdditiveModel two_flat({gain1, bip});
    CHECK_THROWS_AS(two_flat.validate_identifiable(), Error);
    CHECK_NOTHROW(AdditiveModel({lag1, bip}).validate_identifiable());

    // mismatched numerator shapes
    Subsystem other_shape;
    other_shape.den = ScalarPoly{1.0, 2.0};
    Eigen::MatrixXd b2(2, 1);
    b2 << 1.0, 1.0;
    other_shape.num = MatrixPoly(std::vector<Eigen::MatrixXd>{b2});
    CHECK_THROWS_AS(AdditiveModel({lag1, other_shape}), Error);
}

TEST_CASE("response of a sum of static gains is the summed gain response") {
    Eigen::MatrixXd g1(2, 2), g2(2, 2);
    g1 << 1.0, 2.0, 3.0, 4.0;
    g2 << -0.5, 0.1, 0.2, -0.3;
    Subsystem s1, s2;
    s1.den = ScalarPoly{1.0};
    s1.num = MatrixPoly(std::vector<Eigen::MatrixXd>{g1});
    s2.den = ScalarPoly{1.0};
    s2.num = MatrixPoly(std::vector<Eigen::MatrixXd>{g2});
    const AdditiveModel m({s1, s2});
    std::mt19937 rng(1);
    std::normal_distribution<double> dist;
    Eigen::MatrixXd u(40, 2);
    for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = dist(rng);
    const Eigen::MatrixXd y = simulate_additive(m, u, 0.1);
    const Eigen::MatrixXd want = u * (g1 + g2).transpose();
    CHECK((y - want).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("simulation is additive across subsystems") {
    const AdditiveModel m = two_mode_model();
    std::mt19937 rng(2);
    std::normal_distribution<double> dist;
    Eigen::MatrixXd u(300, 2);
    for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = dist(rng);
    const Eigen::MatrixXd whole = simulate_additive(m, u, 0.02);
    const Eigen::MatrixXd parts =
        simulate_subsystem(m.subs[0], u, 0.02) + simulate_subsystem(m.subs[1], u, 0.02);
    CHECK((whole - parts).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("discrete equivalent matches sampled simulation on impulses") {
    const AdditiveModel m = build_three_mass(BenchmarkSpec{});
    const double h = 0.01;
    const StateSpace dtf = zoh_equivalent_dtf(m, h);
    const Eigen::Index N = 500;
    for (Eigen::Index j = 0; j < m.n_u(); ++j) {
        Eigen::MatrixXd u = Eigen::MatrixXd::Zero(N, m.n_u());
        u(0, j) = 1.0;
        const Eigen::MatrixXd via_dtf = dlsim(dtf, u);
        const Eigen::MatrixXd via_sim = simulate_additive(m, u, h);
        CHECK((via_dtf - via_sim).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("frequency response sums the subsystem fractions") {
    const AdditiveModel m = two_mode_model();
    const double w = 3.0;
    const std::complex<double> jw(0.0, w);
    const Eigen::MatrixXcd got = m.freq_response(w);
    const Eigen::MatrixXcd want = m.subs[0].num.eval(jw) / m.subs[0].den.eval(jw) +
                                  m.subs[1].num.eval(jw) / m.subs[1].den.eval(jw);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("stability check honors the margin") {
    const AdditiveModel m = two_mode_model();
    CHECK(m.stable());
    CHECK_FALSE(m.stable(10.0));
    Eigen::MatrixXd b(1, 1);
    b << 1.0;
    Subsystem unstable;
    unstable.den = ScalarPoly{1.0, -1.0};  // root +1
    unstable.num = MatrixPoly(std::vector<Eigen::MatrixXd>{b});
    CHECK_FALSE(AdditiveModel({unstable}).stable());
}

TEST_CASE("permutation reorders subsystems") {
    const AdditiveModel m = two_mode_model();
    const AdditiveModel p = m.permuted({1, 0});
    CHECK(p.subs[0].theta() == m.subs[1].theta());
    CHECK(p.subs[1].theta() == m.subs[0].theta());
    CHECK_THROWS_AS(m.permuted({0, 0}), Error);
}
