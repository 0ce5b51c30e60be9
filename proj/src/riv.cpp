#include "ctsid/riv.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace ctsid {

void EstimatorOptions::validate() const {
    require(max_iter >= 1, ErrorCode::BAD_INPUT, "max_iter must be at least 1");
    require(rel_tol > 0.0, ErrorCode::BAD_INPUT, "rel_tol must be positive");
    require(stability_margin >= 0.0, ErrorCode::BAD_INPUT, "stability_margin must be nonnegative");
    if (loop_mode == LoopMode::Closed)
        require(controller.has_value(), ErrorCode::MISSING_REFERENCE,
                "closed-loop estimation needs the controller");
}

Eigen::Index transient_skip(const AdditiveModel& model, double h, Eigen::Index N) {
    double tau_max = 0.0;
    for (const auto& s : model.subs)
        for (const auto& root : poly_roots(s.den)) {
            const double re = -root.real();
            if (re > 0.0) tau_max = std::max(tau_max, 1.0 / re);
        }
    const double want = std::ceil(5.0 * tau_max / h);
    const auto cap = static_cast<double>(N / 4);
    return static_cast<Eigen::Index>(std::min(want, cap));
}

Eigen::MatrixXd residual(const AdditiveModel& model, const SampledDataset& ds) {
    ds.validate();
    require(ds.n_u() == model.n_u() && ds.n_y() == model.n_y(), ErrorCode::DIM_MISMATCH,
            "dataset channels do not match the model");
    return ds.y - simulate_additive(model, ds.u, ds.h);
}

Eigen::MatrixXd subsystem_residual_output(const AdditiveModel& model, const SampledDataset& ds,
                                          int i) {
    ds.validate();
    require(i >= 0 && i < model.K(), ErrorCode::BAD_INPUT, "subsystem index");
    Eigen::MatrixXd out = ds.y;
    for (int l = 0; l < model.K(); ++l) {
        if (l == i) continue;
        out -= simulate_subsystem(model.subs[static_cast<size_t>(l)], ds.u, ds.h);
    }
    return out;
}

NoiseCovariance noise_covariance(const Eigen::MatrixXd& eps) {
    require(eps.rows() > 0, ErrorCode::BAD_INPUT, "empty residual matrix");
    NoiseCovariance out;
    out.sigma = (eps.transpose() * eps) / static_cast<double>(eps.rows());
    const double tr = out.sigma.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.sigma);
    out.singular = !(tr > 0.0) || es.eigenvalues().minCoeff() < 1e-12 * tr;
    return out;
}

namespace {

// All estimator arithmetic happens with subsystems sorted by
// (n, m, lexicographic theta) so that results do not depend on the order the
// caller listed the subsystems in; outputs are mapped back at the end.
std::vector<int> canonical_order(const AdditiveModel& model) {
    std::vector<int> idx(static_cast<size_t>(model.K()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        const auto& sa = model.subs[static_cast<size_t>(a)];
        const auto& sb = model.subs[static_cast<size_t>(b)];
        if (sa.n() != sb.n()) return sa.n() < sb.n();
        if (sa.m() != sb.m()) return sa.m() < sb.m();
        const Eigen::VectorXd ta = sa.theta(), tb = sb.theta();
        for (Eigen::Index k = 0; k < ta.size(); ++k)
            if (ta(k) != tb(k)) return ta(k) < tb(k);
        return false;
    });
    return idx;
}

std::vector<int> invert_perm(const std::vector<int>& p) {
    std::vector<int> inv(p.size());
    for (size_t i = 0; i < p.size(); ++i) inv[static_cast<size_t>(p[i])] = static_cast<int>(i);
    return inv;
}

ScalarPoly poly_square(const ScalarPoly& a) { return a * a; }

// Noise-free input: the measured input in open loop, the reference pushed
// through the input sensitivity of the current model in closed loop.
Eigen::MatrixXd instrument_source(const AdditiveModel& model, const SampledDataset& ds,
                                  LoopMode mode, const std::optional<DiscreteController>& ctrl) {
    if (mode == LoopMode::Open) return ds.u;
    require(ds.r.has_value(), ErrorCode::MISSING_REFERENCE,
            "closed-loop estimation needs the reference signal");
    require(ctrl.has_value(), ErrorCode::MISSING_REFERENCE,
            "closed-loop estimation needs the controller");
    return noiseless_input(model, *ctrl, *ds.r, ds.h);
}

// Instrument-source model for the iteration. Normally the current iterate;
// when that iterate's loop with the controller is unstable the solver falls
// back to the last iterate whose loop simulation worked, which keeps the
// instruments noise-free functions of the reference.
struct InstrumentSource {
    const AdditiveModel* zmodel = nullptr;
};

// Filtered signals backing the regressor, instrument and filtered residual
// output of every subsystem, full record length.
struct FilterBank {
    Eigen::MatrixXd eps;                           // N x ny
    std::vector<Eigen::MatrixXd> ups;              // K of N x ny
    std::vector<std::vector<Eigen::MatrixXd>> regY;   // [i][j-1]: N x ny, (p^j/A_i) ytilde_i
    std::vector<std::vector<Eigen::MatrixXd>> regU;   // [i][j]:   N x nu, (p^j/A_i) u
    std::vector<std::vector<Eigen::MatrixXd>> instY;  // [i][j-1]: N x ny, (p^j B_i/A_i^2) z
    std::vector<std::vector<Eigen::MatrixXd>> instU;  // [i][j]:   N x nu, (p^j/A_i) z
};

enum BankParts : unsigned {
    kRegressor = 1u,
    kInstrument = 2u,
};

FilterBank build_bank(const AdditiveModel& model, const SampledDataset& ds, unsigned parts,
                      LoopMode mode, const std::optional<DiscreteController>& ctrl,
                      const InstrumentSource& src = {}) {
    const int K = model.K();
    const double h = ds.h;
    FilterBank bank;

    std::vector<Eigen::MatrixXd> sim(static_cast<size_t>(K));
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(ds.N(), model.n_y());
    for (int i = 0; i < K; ++i) {
        sim[static_cast<size_t>(i)] = simulate_subsystem(model.subs[static_cast<size_t>(i)], ds.u, h);
        total += sim[static_cast<size_t>(i)];
    }
    bank.eps = ds.y - total;

    Eigen::MatrixXd z;
    if (parts & kInstrument)
        z = instrument_source(src.zmodel ? *src.zmodel : model, ds, mode, ctrl);

    bank.ups.resize(static_cast<size_t>(K));
    bank.regY.resize(static_cast<size_t>(K));
    bank.regU.resize(static_cast<size_t>(K));
    bank.instY.resize(static_cast<size_t>(K));
    bank.instU.resize(static_cast<size_t>(K));
    for (int i = 0; i < K; ++i) {
        const auto& sub = model.subs[static_cast<size_t>(i)];
        const int n = sub.n(), m = sub.m();
        if (parts & kRegressor) {
            const Eigen::MatrixXd ytilde = bank.eps + sim[static_cast<size_t>(i)];
            bank.ups[static_cast<size_t>(i)] = filter_sampled({1.0}, sub.den, ytilde, h);
            auto& ry = bank.regY[static_cast<size_t>(i)];
            for (int j = 1; j <= n; ++j)
                ry.push_back(filter_sampled(poly_power_of_p(j), sub.den, ytilde, h));
            auto& ru = bank.regU[static_cast<size_t>(i)];
            for (int j = 0; j <= m; ++j)
                ru.push_back(filter_sampled(poly_power_of_p(j), sub.den, ds.u, h));
        }
        if (parts & kInstrument) {
            const ScalarPoly den2 = poly_square(sub.den);
            auto& iy = bank.instY[static_cast<size_t>(i)];
            for (int j = 1; j <= n; ++j) {
                Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(ds.N(), model.n_y());
                for (Eigen::Index r = 0; r < model.n_y(); ++r)
                    for (Eigen::Index c = 0; c < model.n_u(); ++c) {
                        const ScalarPoly e = sub.num.entry(r, c);
                        if (e.is_zero()) continue;
                        acc.col(r) +=
                            filter_sampled(poly_power_of_p(j) * e, den2, z.col(c), h).col(0);
                    }
                iy.push_back(std::move(acc));
            }
            auto& iu = bank.instU[static_cast<size_t>(i)];
            for (int j = 0; j <= m; ++j)
                iu.push_back(filter_sampled(poly_power_of_p(j), sub.den, z, h));
        }
    }
    return bank;
}

// Writes the channel-c column of the stacked regressor (or instrument) for
// rows [k0, k0+len) into `out` (len x d). Layout per subsystem: denominator
// rows first, then vec(B_j) rows in column-major order.
void fill_channel_block(const AdditiveModel& model, const FilterBank& bank, bool instrument,
                        Eigen::Index c, Eigen::Index k0, Eigen::Index len, Eigen::MatrixXd& out) {
    out.setZero();
    const Eigen::Index ny = model.n_y(), nu = model.n_u();
    Eigen::Index off = 0;
    for (int i = 0; i < model.K(); ++i) {
        const auto& sub = model.subs[static_cast<size_t>(i)];
        const int n = sub.n(), m = sub.m();
        const auto& dsrc = instrument ? bank.instY[static_cast<size_t>(i)]
                                      : bank.regY[static_cast<size_t>(i)];
        for (int j = 1; j <= n; ++j)
            out.col(off + j - 1) = -dsrc[static_cast<size_t>(j - 1)].block(k0, c, len, 1);
        const auto& usrc = instrument ? bank.instU[static_cast<size_t>(i)]
                                      : bank.regU[static_cast<size_t>(i)];
        for (int j = 0; j <= m; ++j)
            for (Eigen::Index ci = 0; ci < nu; ++ci)
                out.col(off + n + j * ny * nu + ci * ny + c) =
                    usrc[static_cast<size_t>(j)].block(k0, ci, len, 1);
        off += sub.theta_dim();
    }
}

struct GramAccum {
    Eigen::MatrixXd cross;  // sum PhiHat W Phi^T, d x d
    Eigen::MatrixXd rhs;    // sum PhiHat W Upsilon, d x K
    Eigen::MatrixXd instr;  // sum PhiHat W PhiHat^T, d x d
};

GramAccum accumulate(const AdditiveModel& model, const FilterBank& bank, const Eigen::MatrixXd& W,
                     Eigen::Index skip, bool with_cross) {
    const Eigen::Index N = bank.eps.rows();
    const Eigen::Index ny = model.n_y();
    const int d = model.beta_dim();
    const int K = model.K();
    constexpr Eigen::Index kChunk = 8192;

    GramAccum g;
    g.cross = Eigen::MatrixXd::Zero(d, d);
    g.rhs = Eigen::MatrixXd::Zero(d, K);
    g.instr = Eigen::MatrixXd::Zero(d, d);

    std::vector<Eigen::MatrixXd> P(static_cast<size_t>(ny)), H(static_cast<size_t>(ny)),
        U(static_cast<size_t>(ny));
    Eigen::MatrixXd mixP(kChunk, d), mixU(kChunk, K);
    for (Eigen::Index k0 = skip; k0 < N; k0 += kChunk) {
        const Eigen::Index len = std::min(kChunk, N - k0);
        for (Eigen::Index c = 0; c < ny; ++c) {
            H[static_cast<size_t>(c)].resize(len, d);
            fill_channel_block(model, bank, true, c, k0, len, H[static_cast<size_t>(c)]);
            if (with_cross) {
                P[static_cast<size_t>(c)].resize(len, d);
                fill_channel_block(model, bank, false, c, k0, len, P[static_cast<size_t>(c)]);
                U[static_cast<size_t>(c)].resize(len, K);
                for (int i = 0; i < K; ++i)
                    U[static_cast<size_t>(c)].col(i) =
                        bank.ups[static_cast<size_t>(i)].block(k0, c, len, 1);
            }
        }
        for (Eigen::Index c = 0; c < ny; ++c) {
            if (with_cross) {
                mixP.topRows(len).setZero();
                mixU.topRows(len).setZero();
                for (Eigen::Index c2 = 0; c2 < ny; ++c2) {
                    mixP.topRows(len) += W(c, c2) * P[static_cast<size_t>(c2)];
                    mixU.topRows(len) += W(c, c2) * U[static_cast<size_t>(c2)];
                }
                g.cross.noalias() += H[static_cast<size_t>(c)].transpose() * mixP.topRows(len);
                g.rhs.noalias() += H[static_cast<size_t>(c)].transpose() * mixU.topRows(len);
            }
            mixP.topRows(len).setZero();
            for (Eigen::Index c2 = 0; c2 < ny; ++c2)
                mixP.topRows(len) += W(c, c2) * H[static_cast<size_t>(c2)];
            g.instr.noalias() += H[static_cast<size_t>(c)].transpose() * mixP.topRows(len);
        }
    }
    g.instr = 0.5 * (g.instr + g.instr.transpose()).eval();
    return g;
}

Eigen::MatrixXd regularized_sigma(const Eigen::MatrixXd& eps) {
    const NoiseCovariance nc = noise_covariance(eps);
    const double tr = nc.sigma.trace();
    if (!(tr > 0.0) || !std::isfinite(tr))
        return Eigen::MatrixXd::Identity(nc.sigma.rows(), nc.sigma.cols());
    if (!nc.singular) return nc.sigma;
    return nc.sigma +
           (1e-10 * tr / static_cast<double>(nc.sigma.rows())) *
               Eigen::MatrixXd::Identity(nc.sigma.rows(), nc.sigma.cols());
}

ScalarPoly stabilized_denominator(const ScalarPoly& den, double margin, UnstablePolicy policy) {
    auto roots = poly_roots(den);
    bool touched = false;
    for (auto& r : roots) {
        if (r.real() >= -margin) {
            require(policy == UnstablePolicy::Reflect, ErrorCode::UNSTABLE_ITERATE,
                    "iterate produced an unstable denominator");
            r = std::complex<double>(-std::max(std::abs(r.real()), margin), r.imag());
            touched = true;
        }
    }
    if (!touched) return den;
    ScalarPoly out = poly_from_roots_unit_const(roots);
    out.c.resize(den.c.size(), 0.0);  // keep the nominal degree
    return out;
}

}  // namespace

RegressionMatrices build_regressor(const AdditiveModel& model, const SampledDataset& ds, int i) {
    ds.validate();
    require(i >= 0 && i < model.K(), ErrorCode::BAD_INPUT, "subsystem index");
    const FilterBank bank = build_bank(model, ds, kRegressor, LoopMode::Open, std::nullopt);
    const auto& sub = model.subs[static_cast<size_t>(i)];
    const Eigen::Index ny = model.n_y(), nu = model.n_u(), N = ds.N();
    const int n = sub.n(), m = sub.m(), dim = sub.theta_dim();
    RegressionMatrices out;
    out.upsilon = bank.ups[static_cast<size_t>(i)];
    for (Eigen::Index c = 0; c < ny; ++c) {
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(N, dim);
        for (int j = 1; j <= n; ++j)
            block.col(j - 1) = -bank.regY[static_cast<size_t>(i)][static_cast<size_t>(j - 1)].col(c);
        for (int j = 0; j <= m; ++j)
            for (Eigen::Index ci = 0; ci < nu; ++ci)
                block.col(n + j * ny * nu + ci * ny + c) =
                    bank.regU[static_cast<size_t>(i)][static_cast<size_t>(j)].col(ci);
        out.phi.push_back(std::move(block));
    }
    return out;
}

RegressionMatrices build_instrument(const AdditiveModel& model, const SampledDataset& ds, int i,
                                    LoopMode mode, const std::optional<DiscreteController>& ctrl) {
    ds.validate();
    require(i >= 0 && i < model.K(), ErrorCode::BAD_INPUT, "subsystem index");
    const FilterBank bank = build_bank(model, ds, kInstrument, mode, ctrl);
    const auto& sub = model.subs[static_cast<size_t>(i)];
    const Eigen::Index ny = model.n_y(), nu = model.n_u(), N = ds.N();
    const int n = sub.n(), m = sub.m(), dim = sub.theta_dim();
    RegressionMatrices out;
    for (Eigen::Index c = 0; c < ny; ++c) {
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(N, dim);
        for (int j = 1; j <= n; ++j)
            block.col(j - 1) = -bank.instY[static_cast<size_t>(i)][static_cast<size_t>(j - 1)].col(c);
        for (int j = 0; j <= m; ++j)
            for (Eigen::Index ci = 0; ci < nu; ++ci)
                block.col(n + j * ny * nu + ci * ny + c) =
                    bank.instU[static_cast<size_t>(i)][static_cast<size_t>(j)].col(ci);
        out.phi_hat.push_back(std::move(block));
    }
    return out;
}

namespace {

AdditiveModel riv_step_src(const AdditiveModel& model, const SampledDataset& ds,
                           const EstimatorOptions& opts, const InstrumentSource& src) {
    opts.validate();
    ds.validate();
    require(ds.n_u() == model.n_u() && ds.n_y() == model.n_y(), ErrorCode::DIM_MISMATCH,
            "dataset channels do not match the model");
    model.validate_identifiable();
    require(model.stable(opts.stability_margin), ErrorCode::UNSTABLE_ITERATE,
            "current model is not stable with the requested margin");

    const std::vector<int> order = canonical_order(model);
    const AdditiveModel canon = model.permuted(order);

    const FilterBank bank =
        build_bank(canon, ds, kRegressor | kInstrument, opts.loop_mode, opts.controller, src);
    const Eigen::Index skip = transient_skip(canon, ds.h, ds.N());
    const Eigen::MatrixXd sigma = regularized_sigma(bank.eps.bottomRows(bank.eps.rows() - skip));
    // A residual at numerical zero (relative to the output scale) has a
    // roundoff-junk covariance whose eigenvectors are random; weighting by
    // its inverse would jitter the iterate. Use the unweighted step there.
    // Otherwise clamp the eigenvalue spread: relative weights beyond 1e8
    // buy nothing statistically but do wreck the normal matrix.
    const double y_ms = ds.y.squaredNorm() / static_cast<double>(ds.y.size());
    Eigen::MatrixXd W;
    if (sigma.trace() <= 1e-20 * y_ms * static_cast<double>(sigma.rows())) {
        W = Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols());
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sig_es(sigma);
        const double lmax = sig_es.eigenvalues().maxCoeff();
        Eigen::VectorXd inv_lam(sigma.rows());
        for (Eigen::Index k = 0; k < inv_lam.size(); ++k)
            inv_lam(k) = 1.0 / std::max(sig_es.eigenvalues()(k), 1e-8 * lmax);
        W = sig_es.eigenvectors() * inv_lam.asDiagonal() * sig_es.eigenvectors().transpose();
    }

    const GramAccum g = accumulate(canon, bank, W, skip, /*with_cross=*/true);

    // Equilibrate rows and columns first: parameter scales span several
    // decades, and the conditioning that matters for identifiability is the
    // one that survives diagonal rescaling.
    Eigen::VectorXd rsc = g.cross.rowwise().norm();
    for (Eigen::Index k = 0; k < rsc.size(); ++k) rsc(k) = rsc(k) > 0.0 ? 1.0 / rsc(k) : 1.0;
    Eigen::MatrixXd scaled = rsc.asDiagonal() * g.cross;
    Eigen::VectorXd csc = scaled.colwise().norm().transpose();
    for (Eigen::Index k = 0; k < csc.size(); ++k) csc(k) = csc(k) > 0.0 ? 1.0 / csc(k) : 1.0;
    scaled = scaled * csc.asDiagonal();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    require(smin > 0.0 && smax / smin < 1e12, ErrorCode::ILL_CONDITIONED,
            "instrument-regressor normal matrix condition exceeds 1e12");
    const Eigen::MatrixXd X = csc.asDiagonal() * svd.solve(rsc.asDiagonal() * g.rhs);

    const double margin = std::max(opts.stability_margin, 1e-6);
    AdditiveModel next = canon;
    for (int i = 0; i < canon.K(); ++i) {
        const auto& sub = canon.subs[static_cast<size_t>(i)];
        Eigen::VectorXd theta = X.block(canon.theta_offset(i), i, sub.theta_dim(), 1);
        Subsystem ns =
            Subsystem::from_theta(theta, sub.n(), sub.m(), canon.n_y(), canon.n_u());
        ns.den = stabilized_denominator(ns.den, margin, opts.on_unstable);
        next.subs[static_cast<size_t>(i)] = std::move(ns);
    }
    return next.permuted(invert_perm(order));
}

Eigen::MatrixXd acov_src(const AdditiveModel& model, const SampledDataset& ds,
                         const Eigen::MatrixXd& sigma, const EstimatorOptions& opts,
                         const InstrumentSource& src);

}  // namespace

AdditiveModel riv_step(const AdditiveModel& model, const SampledDataset& ds,
                       const EstimatorOptions& opts) {
    return riv_step_src(model, ds, opts, {});
}

RivResult riv_solve(const AdditiveModel& model0, const SampledDataset& ds,
                    const EstimatorOptions& opts) {
    opts.validate();
    RivResult res;
    res.model = model0;
    // Last iterate whose own loop simulation succeeded; see InstrumentSource.
    AdditiveModel zsrc = model0;
    Eigen::VectorXd beta = model0.flatten();
    for (int it = 0; it < opts.max_iter; ++it) {
        AdditiveModel next = res.model;
        try {
            next = riv_step_src(res.model, ds, opts, {});
            zsrc = res.model;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::CL_UNSTABLE) throw;
            next = riv_step_src(res.model, ds, opts, {&zsrc});
        }
        const Eigen::VectorXd beta_next = next.flatten();
        const double denom = std::max(beta.norm(), 1e-300);
        const double step = (beta_next - beta).norm() / denom;
        res.trace.push_back(step);
        res.model = next;
        beta = beta_next;
        res.iterations = it + 1;
        if (step <= opts.rel_tol) {
            res.converged = true;
            break;
        }
    }
    const Eigen::MatrixXd eps = residual(res.model, ds);
    const Eigen::Index skip = transient_skip(res.model, ds.h, ds.N());
    res.sigma_hat = regularized_sigma(eps.bottomRows(eps.rows() - skip));
    try {
        res.acov = acov_src(res.model, ds, res.sigma_hat, opts, {});
    } catch (const Error& e) {
        if (e.code() != ErrorCode::CL_UNSTABLE) throw;
        res.acov = acov_src(res.model, ds, res.sigma_hat, opts, {&zsrc});
    }
    return res;
}

namespace {

Eigen::MatrixXd acov_src(const AdditiveModel& model, const SampledDataset& ds,
                         const Eigen::MatrixXd& sigma, const EstimatorOptions& opts,
                         const InstrumentSource& src) {
    ds.validate();
    require(sigma.rows() == model.n_y() && sigma.cols() == model.n_y(), ErrorCode::DIM_MISMATCH,
            "sigma shape");
    const std::vector<int> order = canonical_order(model);
    const AdditiveModel canon = model.permuted(order);
    const FilterBank bank =
        build_bank(canon, ds, kInstrument, opts.loop_mode, opts.controller, src);
    const Eigen::Index skip = transient_skip(canon, ds.h, ds.N());
    const Eigen::MatrixXd W = Eigen::LLT<Eigen::MatrixXd>(sigma).solve(
        Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols()));
    const GramAccum g = accumulate(canon, bank, W, skip, /*with_cross=*/false);
    const double neff = static_cast<double>(ds.N() - skip);
    const Eigen::MatrixXd gram = g.instr / neff;
    Eigen::MatrixXd inv;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        inv = ldlt.solve(Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
    } else {
        inv = gram.completeOrthogonalDecomposition().pseudoInverse();
    }
    inv = 0.5 * (inv + inv.transpose()).eval();

    // Undo the canonical ordering: canon subsystem k holds caller subsystem order[k].
    const int d = model.beta_dim();
    Eigen::MatrixXd out(d, d);
    std::vector<int> canon_off(static_cast<size_t>(canon.K()));
    for (int k = 0; k < canon.K(); ++k) canon_off[static_cast<size_t>(k)] = canon.theta_offset(k);
    std::vector<int> caller_off(static_cast<size_t>(model.K()));
    for (int i = 0; i < model.K(); ++i) caller_off[static_cast<size_t>(i)] = model.theta_offset(i);
    Eigen::VectorXi caller_index(d);
    for (int k = 0; k < canon.K(); ++k) {
        const int i = order[static_cast<size_t>(k)];
        const int dim = canon.subs[static_cast<size_t>(k)].theta_dim();
        for (int t = 0; t < dim; ++t)
            caller_index(canon_off[static_cast<size_t>(k)] + t) =
                caller_off[static_cast<size_t>(i)] + t;
    }
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) out(caller_index(a), caller_index(b)) = inv(a, b);
    return out;
}

}  // namespace

Eigen::MatrixXd asymptotic_covariance(const AdditiveModel& model, const SampledDataset& ds,
                                      const Eigen::MatrixXd& sigma, const EstimatorOptions& opts) {
    return acov_src(model, ds, sigma, opts, {});
}

std::vector<int> align_submodels(AdditiveModel& est, const AdditiveModel& ref) {
    std::vector<int> identity(static_cast<size_t>(est.K()));
    std::iota(identity.begin(), identity.end(), 0);
    if (est.K() != ref.K() || est.n_u() != ref.n_u() || est.n_y() != ref.n_y()) return identity;

    // Group ref positions by orders; est must offer the same multiset.
    std::vector<std::vector<int>> groups;
    std::vector<std::pair<int, int>> keys;
    for (int i = 0; i < ref.K(); ++i) {
        const auto key = std::make_pair(ref.subs[static_cast<size_t>(i)].n(),
                                        ref.subs[static_cast<size_t>(i)].m());
        auto it = std::find(keys.begin(), keys.end(), key);
        if (it == keys.end()) {
            keys.push_back(key);
            groups.emplace_back();
            it = std::prev(keys.end());
        }
        groups[static_cast<size_t>(it - keys.begin())].push_back(i);
    }
    for (size_t gi = 0; gi < groups.size(); ++gi) {
        for (int pos : groups[gi]) {
            const auto& es = est.subs[static_cast<size_t>(pos)];
            if (es.n() != keys[gi].first || es.m() != keys[gi].second) return identity;
        }
    }

    std::vector<int> perm = identity;
    for (const auto& group : groups) {
        if (group.size() < 2) continue;
        std::vector<int> cand(group);
        std::sort(cand.begin(), cand.end());
        std::vector<int> best(cand);
        double best_cost = std::numeric_limits<double>::infinity();
        std::vector<int> trial(cand);
        do {
            double cost = 0.0;
            for (size_t t = 0; t < group.size(); ++t) {
                const auto& a = est.subs[static_cast<size_t>(trial[t])];
                const auto& b = ref.subs[static_cast<size_t>(group[t])];
                cost += (a.theta() - b.theta()).squaredNorm();
            }
            if (cost < best_cost) {
                best_cost = cost;
                best = trial;
            }
        } while (std::next_permutation(trial.begin(), trial.end()));
        for (size_t t = 0; t < group.size(); ++t) perm[static_cast<size_t>(group[t])] = best[t];
    }
    est = est.permuted(perm);
    return perm;
}

}  // namespace ctsid
