#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ctsid/closed_loop.hpp"
#include "ctsid/model.hpp"
#include "ctsid/projection.hpp"
#include "ctsid/riv.hpp"

namespace ctsid {

/// Mass-spring-damper chain benchmark: masses in series, spring i between
/// mass i and mass i-1, mass 0 grounded, free at the far end. Forces in,
/// displacements out (collocated, square). Damping is specified modally.
struct BenchmarkSpec {
    std::vector<double> masses{1.0, 1.0, 1.0};
    std::vector<double> springs{50.0, 50.0, 50.0};
    double damping_ratio = 0.02;
    double fs = 100.0;
    LoopMode loop_mode = LoopMode::Open;
    std::vector<double> noise_num{1.0, 0.5};    // ARMA numerator in q^-1
    std::vector<double> noise_den{1.0, -0.85};  // ARMA denominator in q^-1
    double snr_db = 30.0;

    double h() const { return 1.0 / fs; }
};

/// Ground-truth model from the undamped eigen-decomposition of the chain:
/// mode i gets omega_i, the configured damping ratio and the mass-normalized
/// shape, assembled through the modal map so every numerator is exactly rank 1.
AdditiveModel build_three_mass(const BenchmarkSpec& spec);

/// Modal description matching build_three_mass (canonical gauge).
ModalParams three_mass_modal_truth(const BenchmarkSpec& spec);

/// Diagonal discrete lead-lag controller for the benchmark with loop
/// crossover near 0.3*omega_1 per channel and a lag section for low-frequency
/// gain; the gain backs off automatically until the loop is verified stable.
DiscreteController design_benchmark_controller(const AdditiveModel& model, double h);

/// Per-channel iid Gaussian innovations through the ARMA filter
/// num(q^-1)/den(q^-1), zero initial state, deterministic per seed.
/// Throws UNSTABLE_NOISE_FILTER when den has roots on or outside the unit circle.
Eigen::MatrixXd gen_noise(Eigen::Index N, Eigen::Index n_y, const std::vector<double>& num,
                          const std::vector<double>& den, std::uint64_t seed);

/// Single scalar c with 10*log10(mean_j var(x_j) / mean_j var(c v_j)) = target_db.
/// Throws ZERO_SIGNAL when x has no power.
double calibrate_snr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& v, double target_db);

enum class Pipeline { Unstructured, Structured, OpenOnClosed };

struct McConfig {
    std::vector<Eigen::Index> sample_sizes;
    int runs_per_size = 0;
    std::uint64_t seed = 0;
    double init_perturbation = 0.025;  // relative, uniform in [-delta, +delta]
    std::vector<int> tracked_params;   // indices into beta
    int threads = 0;                   // 0 = hardware concurrency

    void validate() const;
};

struct McRow {
    std::string method;
    Eigen::Index N = 0;
    int param = 0;
    double mse = 0.0;
};

struct McResultTable {
    std::vector<McRow> rows;
    int failed_runs = 0;
    int total_runs = 0;
};

/// Tracked-parameter indices used throughout: the three a_{i,2} denominator
/// coefficients and the three B_{i,0}(3,3) numerator entries of the benchmark.
std::vector<int> benchmark_tracked_params();

/// Indices of the subset of tracked_params that are numerator entries.
std::vector<int> benchmark_tracked_numerators();

/// Runs the study: per (size, run) draws fresh excitation and noise, perturbs
/// the truth for initialization, estimates, aligns to the truth and
/// accumulates squared errors of the tracked parameters. Failed runs are
/// excluded; more than 20% failures at any size throws MC_UNRELIABLE.
/// Deterministic for a given seed regardless of thread count.
McResultTable run_monte_carlo(const BenchmarkSpec& spec, const McConfig& mc, Pipeline pipeline);

/// (method, N, param, MSE) rows.
void write_mc_csv(const McResultTable& table, const std::string& path);
McResultTable read_mc_csv(const std::string& path);

/// Log-log MSE-vs-N line plot, one polyline per (method, param) series.
/// Throws EMPTY_TABLE on an empty input.
void write_mc_svg(const McResultTable& table, const std::string& path);

}  // namespace ctsid
