// Acceptance gate: eight numbered end-to-end criteria, each printing a single
// PASS/FAIL line (plus indented diagnostics). Run all or select one with
// --criterion N. Exit 0 only when every selected criterion passes.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>
#include <iostream>
#include <random>
#include <vector>

#include "ctsid/closed_loop.hpp"
#include "ctsid/harness.hpp"
#include "ctsid/json_io.hpp"
#include "ctsid/projection.hpp"
#include "ctsid/riv.hpp"
#include "oracles.hpp"

using namespace ctsid;

namespace {

Eigen::MatrixXd white(Eigen::Index N, Eigen::Index cols, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    Eigen::MatrixXd out(N, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index k = 0; k < N; ++k) out(k, c) = dist(rng);
    return out;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::string sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(3) << v;
    return os.str();
}

struct Check {
    bool ok;
    std::string detail;
};

void report(std::vector<Check>& checks, bool ok, const std::string& detail) {
    checks.push_back({ok, detail});
}

bool finish(int n, const std::string& label, const std::vector<Check>& checks) {
    bool all = true;
    for (const auto& c : checks) all = all && c.ok;
    std::cout << "CRITERION " << n << ": " << (all ? "PASS" : "FAIL") << " — " << label << "\n";
    for (const auto& c : checks)
        std::cout << "    [" << (c.ok ? "ok" : "FAIL") << "] " << c.detail << "\n";
    return all;
}

// ---------------------------------------------------------------------------
// 1. The constructed benchmark against its published rounded parameters.

bool criterion1() {
    std::vector<Check> checks;
    const AdditiveModel model = build_three_mass(BenchmarkSpec{});
    const double a_pub[3] = {0.101, 0.0129, 0.0062};
    const double b_pub[3] = {0.0548, 0.0045, 0.0007};
    constexpr double kTolA = 0.005;  // pinned: 0.5% on denominator curvature
    constexpr double kTolB = 0.02;   // pinned: 2% on the corner residue entry
    for (int i = 0; i < 3; ++i) {
        const double a = model.subs[static_cast<size_t>(i)].den.c[2];
        const double e = rel_err(a, a_pub[i]);
        report(checks, e <= kTolA,
               "a_" + std::to_string(i + 1) + ",2 = " + sci(a) + " vs " +
                   sci(a_pub[i]) + " (rel " + sci(e) + ", tol 0.005)");
    }
    for (int i = 0; i < 3; ++i) {
        const double b = model.subs[static_cast<size_t>(i)].num.coef[0](2, 2);
        const double e = rel_err(b, b_pub[i]);
        report(checks, e <= kTolB,
               "B_" + std::to_string(i + 1) + ",0(3,3) = " + sci(b) + " vs " +
                   sci(b_pub[i]) + " (rel " + sci(e) + ", tol 0.02)");
    }
    // Context for the expected failures: the exact eigen-decomposition of the
    // chain pins sum_i B_i,0(3,3) to the inverse-stiffness entry 0.06, which
    // the rounded reference values cannot satisfy (0.0548+0.0045+0.0007 =
    // 0.06 only by coincidence of rounding; the third-mode entries round to
    // 0.0062/0.0007 from 0.0061596/0.0006626, i.e. 0.65% and 5.3% off).
    Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(3, 3);
    for (const auto& s : model.subs) dc += s.num.coef[0];
    report(checks, std::abs(dc(2, 2) - 0.06) < 1e-10,
           "static-gain pin sum_i B_i,0(3,3) = " + sci(dc(2, 2)) + " (exact 0.06)");
    return finish(1, "benchmark parameters vs published roundings", checks);
}

// ---------------------------------------------------------------------------
// 2. Noise-free exact recovery.

bool criterion2() {
    std::vector<Check> checks;
    const BenchmarkSpec spec;
    const AdditiveModel truth = build_three_mass(spec);
    const Eigen::Index N = 5000;
    SampledDataset ds;
    ds.h = spec.h();
    ds.u = white(N, 3, 21);
    ds.y = simulate_additive(truth, ds.u, ds.h);

    std::mt19937 rng(22);
    std::uniform_real_distribution<double> unif(-0.025, 0.025);
    Eigen::VectorXd b0 = truth.flatten();
    for (Eigen::Index k = 0; k < b0.size(); ++k) b0(k) *= 1.0 + unif(rng);

    EstimatorOptions opts;
    RivResult res = riv_solve(truth.unflatten(b0), ds, opts);
    align_submodels(res.model, truth);
    const Eigen::VectorXd est = res.model.flatten();
    const Eigen::VectorXd want = truth.flatten();
    double worst = 0.0;
    for (Eigen::Index k = 0; k < est.size(); ++k) worst = std::max(worst, rel_err(est(k), want(k)));
    report(checks, res.converged,
           "converged in " + std::to_string(res.iterations) + " iterations");
    report(checks, worst < 1e-4,
           "worst relative parameter error " + sci(worst) + " (tol 1e-4)");
    return finish(2, "noiseless recovery at N=5000", checks);
}

// ---------------------------------------------------------------------------
// 3. Open-loop MSE consistency trend.

bool criterion3() {
    std::vector<Check> checks;
    BenchmarkSpec spec;  // open loop, ARMA noise, 30 dB
    McConfig mc;
    mc.sample_sizes = {1000, 5623, 31623};  // 10^3, 10^3.75, 10^4.5
    mc.runs_per_size = 50;
    mc.seed = 31;
    mc.tracked_params = benchmark_tracked_params();
    const McResultTable table = run_monte_carlo(spec, mc, Pipeline::Unstructured);
    report(checks, table.failed_runs <= table.total_runs / 5,
           std::to_string(table.failed_runs) + "/" + std::to_string(table.total_runs) +
               " runs failed");
    for (int p : mc.tracked_params) {
        std::vector<double> mse;
        for (auto N : mc.sample_sizes)
            for (const auto& row : table.rows)
                if (row.param == p && row.N == N) mse.push_back(row.mse);
        const bool monotone = mse.size() == 3 && mse[0] > mse[1] && mse[1] > mse[2];
        // least-squares slope on the log-log grid
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < 3; ++i) {
            const double x = std::log10(static_cast<double>(mc.sample_sizes[i]));
            const double y = std::log10(mse[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
        report(checks, monotone && slope <= -0.7,
               "param " + std::to_string(p) + ": MSE " + sci(mse[0]) + " -> " +
                   sci(mse[1]) + " -> " + sci(mse[2]) + ", slope " +
                   sci(slope) + " (monotone, <= -0.7)");
    }
    return finish(3, "MSE decreases with N at slope <= -0.7 (M=50)", checks);
}

// ---------------------------------------------------------------------------
// 4. Asymptotic covariance against the Monte Carlo spread and the numeric
//    information bound. Reduced-size variant: N=3e4, M=150, 40% tolerance.
//
// The lightly damped modes concentrate their information in bands a few
// tenths of rad/s wide, so the conditional covariance swings by a factor of
// three with the input realization at this N. The formula is therefore
// checked as the law of total variance reads it: empirical spread against
// the run-averaged prediction.

bool criterion4() {
    std::vector<Check> checks;
    const BenchmarkSpec spec;
    const AdditiveModel truth = build_three_mass(spec);
    const Eigen::VectorXd beta_true = truth.flatten();
    const double h = spec.h();
    const Eigen::Index N = 30000;
    const int M = 150;
    constexpr double kTolEmp = 0.40;
    constexpr double kTolCrlb = 0.10;

    EstimatorOptions opts;
    opts.max_iter = 60;
    const Eigen::Index skip = transient_skip(truth, h, N);
    const double neff = static_cast<double>(N - skip);

    Eigen::MatrixXd est(M, beta_true.size());
    Eigen::MatrixXd pred(M, beta_true.size());
    Eigen::MatrixXd zsc(M, beta_true.size());
    int good = 0;
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> unif(-0.025, 0.025);
    Eigen::MatrixXd sigma0;  // run-0 noise covariance, reused for the bound
    for (int m = 0; m < M; ++m) {
        try {
            SampledDataset ds;
            ds.h = h;
            ds.u = white(N, 3, 4000 + static_cast<unsigned>(m));
            const Eigen::MatrixXd x = simulate_additive(truth, ds.u, h);
            const Eigen::MatrixXd v = white(N, 3, 5000 + static_cast<unsigned>(m));
            const double c = calibrate_snr(x, v, spec.snr_db);
            ds.y = x + c * v;
            Eigen::VectorXd b0 = beta_true;
            for (Eigen::Index k = 0; k < b0.size(); ++k) b0(k) *= 1.0 + unif(rng);
            RivResult res = riv_solve(truth.unflatten(b0), ds, opts);
            align_submodels(res.model, truth);

            SampledDataset dsf = ds;
            dsf.y = x;  // formula evaluated at the truth on this run's input
            const Eigen::MatrixXd sig = c * c * Eigen::MatrixXd::Identity(3, 3);
            if (m == 0) sigma0 = sig;
            const Eigen::MatrixXd acov = asymptotic_covariance(truth, dsf, sig, opts);
            est.row(good) = res.model.flatten().transpose();
            for (Eigen::Index k = 0; k < beta_true.size(); ++k) {
                pred(good, k) = acov(k, k) / neff;
                zsc(good, k) = (est(good, k) - beta_true(k)) / std::sqrt(pred(good, k));
            }
            ++good;
        } catch (const Error&) {
        }
    }
    report(checks, good >= M * 4 / 5, std::to_string(M - good) + "/" + std::to_string(M) +
                                          " runs failed");
    const Eigen::MatrixXd used = est.topRows(good);
    const Eigen::RowVectorXd mean = used.colwise().mean();
    Eigen::VectorXd emp_var = Eigen::VectorXd::Zero(beta_true.size());
    for (int m = 0; m < good; ++m)
        emp_var += (used.row(m) - mean).array().square().matrix().transpose();
    emp_var /= static_cast<double>(good - 1);
    const Eigen::VectorXd pred_mean =
        pred.topRows(good).colwise().mean().transpose();

    double worst_emp = 0.0;
    Eigen::Index worst_k = 0;
    for (Eigen::Index k = 0; k < beta_true.size(); ++k) {
        const double e = rel_err(emp_var(k), pred_mean(k));
        if (e > worst_emp) {
            worst_emp = e;
            worst_k = k;
        }
    }
    report(checks, worst_emp <= kTolEmp,
           "worst relative gap, empirical variance vs mean prediction: " + sci(worst_emp) +
               " at param " + std::to_string(worst_k) + " (emp " + sci(emp_var(worst_k)) +
               ", pred " + sci(pred_mean(worst_k)) + "; tol 0.40, M=" + std::to_string(good) +
               ")");
    {
        // per-run standardized deviations should be unit variance
        double lo = 1e300, hi = 0.0;
        for (Eigen::Index k = 0; k < beta_true.size(); ++k) {
            const Eigen::VectorXd col = zsc.col(k).head(good);
            const double zm = col.mean();
            const double zv = (col.array() - zm).square().sum() / static_cast<double>(good - 1);
            lo = std::min(lo, zv);
            hi = std::max(hi, zv);
        }
        report(checks, true,
               "standardized per-run variance range [" + sci(lo) + ", " + sci(hi) + "]");
    }

    SampledDataset ds0;
    ds0.h = h;
    ds0.u = white(N, 3, 4000);
    ds0.y = simulate_additive(truth, ds0.u, h);
    const Eigen::MatrixXd acov0 = asymptotic_covariance(truth, ds0, sigma0, opts);
    const auto outfun = [&](const Eigen::VectorXd& b) {
        return simulate_additive(truth.unflatten(b), ds0.u, h);
    };
    const Eigen::MatrixXd info = oracle::fisher_numeric(outfun, beta_true, sigma0, skip);
    const Eigen::MatrixXd crlb = Eigen::FullPivLU<Eigen::MatrixXd>(info).inverse();
    double worst_crlb = 0.0;
    for (Eigen::Index k = 0; k < beta_true.size(); ++k)
        worst_crlb = std::max(worst_crlb, rel_err(acov0(k, k), crlb(k, k)));
    report(checks, worst_crlb <= kTolCrlb,
           "worst relative gap, predicted vs numeric information bound: " +
               sci(worst_crlb) + " (tol 0.10)");
    return finish(4, "covariance formula matches spread and bound (N=3e4)", checks);
}

// ---------------------------------------------------------------------------
// 5. Structured projection reduces numerator variance; the statistically
//    weighted projection beats the unweighted one.
//
// The output channels carry unequal noise levels (stds 1 : 1.5 : 3). With
// equal levels the identity weighting is already column-optimal for the
// rank-1 numerator fit and the trace comparison degenerates to a coin flip
// decided by weight-estimation noise; unequal sensor noise is what the
// covariance weighting is for.

bool criterion5() {
    std::vector<Check> checks;
    const BenchmarkSpec spec;
    const AdditiveModel truth = build_three_mass(spec);
    const ModalParams modal_truth = three_mass_modal_truth(spec);
    const Eigen::VectorXd beta_true = truth.flatten();
    const double h = spec.h();
    const Eigen::Index N = 10000;
    const int M = 100;
    const ModalMap map(3, 3, 3);
    const auto tracked = benchmark_tracked_numerators();

    std::mt19937 rng(51);
    std::uniform_real_distribution<double> unif(-0.025, 0.025);
    Eigen::MatrixXd rho_opt(M, map.dim_rho()), rho_id(M, map.dim_rho());
    Eigen::VectorXd mse_unstruct = Eigen::VectorXd::Zero(3), mse_struct = Eigen::VectorXd::Zero(3);
    int good = 0;
    EstimatorOptions opts;
    opts.max_iter = 60;
    for (int m = 0; m < M; ++m) {
        try {
            SampledDataset ds;
            ds.h = h;
            ds.u = white(N, 3, 6000 + static_cast<unsigned>(m));
            const Eigen::MatrixXd x = simulate_additive(truth, ds.u, h);
            Eigen::MatrixXd v =
                gen_noise(N, 3, spec.noise_num, spec.noise_den, 7000 + static_cast<unsigned>(m));
            v.col(1) *= 1.5;
            v.col(2) *= 3.0;
            ds.y = x + calibrate_snr(x, v, spec.snr_db) * v;
            Eigen::VectorXd b0 = beta_true;
            for (Eigen::Index k = 0; k < b0.size(); ++k) b0(k) *= 1.0 + unif(rng);
            RivResult res = riv_solve(truth.unflatten(b0), ds, opts);

            Eigen::VectorXd rho0;
            try {
                rho0 = modal_init(res.model).pack();
            } catch (const Error&) {
                rho0 = modal_truth.pack();
            }
            const Eigen::VectorXd beta_hat = res.model.flatten();
            const ProjectionResult popt = project(beta_hat, res.acov, map, rho0);
            const ProjectionResult pid = project(
                beta_hat, Eigen::MatrixXd::Identity(beta_hat.size(), beta_hat.size()), map, rho0);

            // order modes by frequency so the chart samples are comparable
            const auto by_omega = [&](const Eigen::VectorXd& rho) {
                ModalParams p = ModalParams::unpack(rho, 3, 3, 3);
                std::sort(p.modes.begin(), p.modes.end(),
                          [](const ModalMode& a, const ModalMode& b) { return a.omega < b.omega; });
                return p.pack();
            };
            rho_opt.row(good) = by_omega(popt.rho_hat).transpose();
            rho_id.row(good) = by_omega(pid.rho_hat).transpose();

            AdditiveModel struct_model = truth.unflatten(map.eval(popt.rho_hat));
            align_submodels(struct_model, truth);
            const Eigen::VectorXd sb = struct_model.flatten();
            align_submodels(res.model, truth);
            const Eigen::VectorXd ub = res.model.flatten();
            for (size_t t = 0; t < tracked.size(); ++t) {
                const int p = tracked[t];
                mse_unstruct(static_cast<Eigen::Index>(t)) +=
                    (ub(p) - beta_true(p)) * (ub(p) - beta_true(p));
                mse_struct(static_cast<Eigen::Index>(t)) +=
                    (sb(p) - beta_true(p)) * (sb(p) - beta_true(p));
            }
            ++good;
        } catch (const Error&) {
        }
    }
    report(checks, good >= M * 4 / 5,
           std::to_string(M - good) + "/" + std::to_string(M) + " runs failed");
    mse_unstruct /= static_cast<double>(good);
    mse_struct /= static_cast<double>(good);
    for (size_t t = 0; t < tracked.size(); ++t) {
        const auto ti = static_cast<Eigen::Index>(t);
        report(checks, mse_struct(ti) <= mse_unstruct(ti),
               "numerator param " + std::to_string(tracked[t]) + ": structured MSE " +
                   sci(mse_struct(ti)) + " <= unstructured " +
                   sci(mse_unstruct(ti)));
    }
    const auto cov_trace = [&](const Eigen::MatrixXd& samples) {
        const Eigen::MatrixXd used = samples.topRows(good);
        const Eigen::RowVectorXd mean = used.colwise().mean();
        double tr = 0.0;
        for (int m = 0; m < good; ++m) tr += (used.row(m) - mean).squaredNorm();
        return tr / static_cast<double>(good - 1);
    };
    const double tr_opt = cov_trace(rho_opt), tr_id = cov_trace(rho_id);
    report(checks, tr_opt < tr_id,
           "empirical chart covariance trace: weighted " + sci(tr_opt) +
               " < unweighted " + sci(tr_id));
    return finish(5, "structured stage cuts numerator variance (N=1e4, M=100)", checks);
}

// ---------------------------------------------------------------------------
// 6. Closed-loop estimator keeps converging where the open-loop variant hits
//    its bias floor on the same data.

bool criterion6() {
    std::vector<Check> checks;
    BenchmarkSpec spec;
    spec.loop_mode = LoopMode::Closed;
    // The direct-variant bias comes from the overlap of the noise
    // autocorrelation with the instrument-filter impulse responses, whose
    // dominant lags sit near the resonance periods in samples. At 10 Hz the
    // mode periods are 20, 7, and 5 samples, inside the noise memory of a few
    // samples, so the bias floor is visible; at the benchmark's higher rates
    // it is orders of magnitude below the variance at these record lengths.
    // Heavy sensor noise on a band-limited servo reference keeps the floor
    // above the N=1e3 variance for every tracked numerator.
    spec.fs = 10.0;
    spec.snr_db = 3.0;
    McConfig mc;
    mc.sample_sizes = {1000, 10000};
    mc.runs_per_size = 50;
    mc.seed = 61;
    mc.tracked_params = benchmark_tracked_numerators();
    const McResultTable closed = run_monte_carlo(spec, mc, Pipeline::Unstructured);
    const McResultTable open_variant = run_monte_carlo(spec, mc, Pipeline::OpenOnClosed);
    report(checks, closed.failed_runs <= closed.total_runs / 5,
           "closed variant: " + std::to_string(closed.failed_runs) + "/" +
               std::to_string(closed.total_runs) + " runs failed");
    report(checks, open_variant.failed_runs <= open_variant.total_runs / 5,
           "open variant: " + std::to_string(open_variant.failed_runs) + "/" +
               std::to_string(open_variant.total_runs) + " runs failed");
    const auto mse_at = [](const McResultTable& t, int param, Eigen::Index N) {
        for (const auto& row : t.rows)
            if (row.param == param && row.N == N) return row.mse;
        return -1.0;
    };
    for (int p : mc.tracked_params) {
        const double c_ratio = mse_at(closed, p, 1000) / mse_at(closed, p, 10000);
        const double o_ratio = mse_at(open_variant, p, 1000) / mse_at(open_variant, p, 10000);
        report(checks, c_ratio >= 3.0,
               "param " + std::to_string(p) + ": closed-variant MSE drop " +
                   sci(c_ratio) + "x (need >= 3x)");
        report(checks, o_ratio < 1.5,
               "param " + std::to_string(p) + ": open-variant-on-closed-data drop " +
                   sci(o_ratio) + "x (bias floor, need < 1.5x)");
    }
    return finish(6, "closed-loop consistency vs open-variant bias floor", checks);
}

// ---------------------------------------------------------------------------
// 7. The key module properties, re-run standalone.

bool criterion7() {
    std::vector<Check> checks;
    const BenchmarkSpec spec;
    const AdditiveModel truth = build_three_mass(spec);
    const double h = spec.h();

    {  // fixed point on noiseless data
        SampledDataset ds;
        ds.h = h;
        ds.u = white(4000, 3, 71);
        ds.y = simulate_additive(truth, ds.u, h);
        EstimatorOptions opts;
        const AdditiveModel next = riv_step(truth, ds, opts);
        const double gap = (next.flatten() - truth.flatten()).cwiseAbs().maxCoeff();
        report(checks, gap < 1e-6, "noiseless fixed point, step " + sci(gap) + " (tol 1e-6)");
    }
    {  // scalar degeneration to the textbook step
        Subsystem s;
        s.den = ScalarPoly{1.0, 0.0127, 0.101};
        s.num = MatrixPoly(std::vector<Eigen::MatrixXd>{(Eigen::MatrixXd(1, 1) << 0.055).finished()});
        const AdditiveModel siso({s});
        SampledDataset ds;
        ds.h = h;
        ds.u = white(4000, 1, 72);
        ds.y = simulate_additive(siso, ds.u, h) + 0.001 * white(4000, 1, 73);
        Subsystem s0 = s;
        s0.den = ScalarPoly{1.0, 0.015, 0.095};
        s0.num = MatrixPoly(std::vector<Eigen::MatrixXd>{(Eigen::MatrixXd(1, 1) << 0.05).finished()});
        const AdditiveModel init({s0});
        EstimatorOptions opts;
        const Eigen::VectorXd got = riv_step(init, ds, opts).flatten();
        const Eigen::VectorXd want = oracle::srivc_reference_step(
            s0.den, s0.num.entry(0, 0), ds.u.col(0), ds.y.col(0), h,
            transient_skip(init, h, 4000));
        const double gap = (got - want).cwiseAbs().maxCoeff();
        report(checks, gap < 1e-8, "scalar textbook step gap " + sci(gap) + " (tol 1e-8)");
    }
    {  // chart Jacobian vs finite differences
        const ModalMap map(3, 3, 3);
        const Eigen::VectorXd rho = three_mass_modal_truth(spec).pack();
        const Eigen::MatrixXd J = map.jacobian(rho);
        const Eigen::MatrixXd Jfd =
            oracle::fd_jacobian([&](const Eigen::VectorXd& x) { return map.eval(x); }, rho);
        const double gap = (J - Jfd).cwiseAbs().maxCoeff();
        report(checks, gap < 1e-6, "chart Jacobian vs finite differences " + sci(gap) + " (tol 1e-6)");
    }
    {  // sampled filtering vs the plain recursion
        const ScalarPoly num{1.0, 0.3}, den{1.0, 0.8, 0.2};
        const Eigen::MatrixXd u = white(1000, 1, 74);
        const Eigen::MatrixXd a = filter_sampled(num, den, u, 0.05);
        const Eigen::MatrixXd b =
            oracle::lsim_oracle(zoh_discretize(siso_tf_to_ss(num, den), 0.05), u);
        const double gap = (a - b).cwiseAbs().maxCoeff();
        report(checks, gap < 1e-12, "filtering vs plain recursion " + sci(gap) + " (tol 1e-12)");
    }
    {  // closed-loop log consistency
        const DiscreteController ctrl = design_benchmark_controller(truth, h);
        const Eigen::MatrixXd r = white(1500, 3, 75);
        const Eigen::MatrixXd v = 0.05 * white(1500, 3, 76);
        const auto [u, y] = simulate_closed_loop(truth, ctrl, r, v, h);
        const double gap_u = (u - dlsim(ctrl.sys, r - y)).cwiseAbs().maxCoeff();
        const double gap_y = (y - simulate_additive(truth, u, h) - v).cwiseAbs().maxCoeff();
        report(checks, gap_u < 1e-10 && gap_y < 1e-10,
               "loop equations residual u " + sci(gap_u) + ", y " + sci(gap_y) + " (tol 1e-10)");
    }
    {  // bit-exact determinism
        const Eigen::MatrixXd n1 = gen_noise(5000, 3, spec.noise_num, spec.noise_den, 77);
        const Eigen::MatrixXd n2 = gen_noise(5000, 3, spec.noise_num, spec.noise_den, 77);
        bool same = (n1 - n2).cwiseAbs().maxCoeff() == 0.0;

        SampledDataset ds;
        ds.h = h;
        ds.u = white(2000, 3, 78);
        const Eigen::MatrixXd x = simulate_additive(truth, ds.u, h);
        const Eigen::MatrixXd v = gen_noise(2000, 3, spec.noise_num, spec.noise_den, 79);
        ds.y = x + calibrate_snr(x, v, spec.snr_db) * v;
        Eigen::VectorXd b0 = truth.flatten();
        b0 *= 1.01;
        EstimatorOptions opts;
        AdditiveModel m1 = riv_step(truth.unflatten(b0), ds, opts);
        AdditiveModel m2 = riv_step(truth.unflatten(b0).permuted({2, 0, 1}), ds, opts);
        align_submodels(m2, m1);
        const Eigen::VectorXd f1 = m1.flatten(), f2 = m2.flatten();
        for (Eigen::Index k = 0; k < f1.size(); ++k) same = same && (f1(k) == f2(k));
        report(checks, same, "noise generation and reordered update are bit-identical");
    }
    return finish(7, "module property suite", checks);
}

// ---------------------------------------------------------------------------
// 8. Projection covariance algebra on random problems.

bool criterion8() {
    std::vector<Check> checks;
    std::mt19937 rng(81);
    std::normal_distribution<double> dist;
    std::uniform_int_distribution<int> nbd(4, 10);
    bool eq_ok = true, dom_ok = true;
    double worst_eq = 0.0, worst_dom = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int nb = nbd(rng);
        std::uniform_int_distribution<int> nrd(1, nb - 1);
        const int nr = nrd(rng);
        Eigen::MatrixXd J(nb, nr);
        for (Eigen::Index k = 0; k < J.size(); ++k) J(k) = dist(rng);
        const auto spd = [&](int n) {
            Eigen::MatrixXd L(n, n);
            for (Eigen::Index k = 0; k < L.size(); ++k) L(k) = dist(rng);
            return Eigen::MatrixXd(L * L.transpose() +
                                   0.5 * static_cast<double>(n) *
                                       Eigen::MatrixXd::Identity(n, n));
        };
        const Eigen::MatrixXd P = spd(nb), Q = spd(nb);
        const Eigen::MatrixXd opt =
            (J.transpose() * P.llt().solve(J)).inverse();
        const Eigen::MatrixXd via_gc = general_covariance(J, P, P);
        const double eq_gap =
            (via_gc - opt).cwiseAbs().maxCoeff() / (1.0 + opt.cwiseAbs().maxCoeff());
        worst_eq = std::max(worst_eq, eq_gap);
        eq_ok = eq_ok && eq_gap <= 1e-10;

        const Eigen::MatrixXd sub = general_covariance(J, Q, P);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub - opt);
        const double lam = es.eigenvalues().minCoeff() / (1.0 + opt.norm());
        worst_dom = std::min(worst_dom, lam);
        dom_ok = dom_ok && lam >= -1e-9;
    }
    report(checks, eq_ok, "optimal-weight identity, worst gap " + sci(worst_eq) + " (tol 1e-10)");
    report(checks, dom_ok,
           "any-weight domination, worst scaled eigenvalue " + sci(worst_dom) + " (tol -1e-9)");
    return finish(8, "projection covariance identities on 100 random triples", checks);
}

}  // namespace

int main(int argc, char** argv) {
    int selected = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            selected = std::atoi(argv[i + 1]);
            ++i;
        } else {
            std::cerr << "usage: acceptance [--criterion N]\n";
            return 2;
        }
    }
    using Fn = bool (*)();
    const Fn criteria[8] = {criterion1, criterion2, criterion3, criterion4,
                            criterion5, criterion6, criterion7, criterion8};
    bool all = true;
    for (int n = 1; n <= 8; ++n) {
        if (selected != 0 && selected != n) continue;
        const auto start = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = criteria[n - 1]();
        } catch (const std::exception& e) {
            std::cout << "CRITERION " << n << ": FAIL — unhandled error: " << e.what() << "\n";
        }
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        std::cout << "    (" << secs << " s)\n";
        all = all && ok;
    }
    return all ? 0 : 1;
}
