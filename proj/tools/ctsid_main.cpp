#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <random>
#include <string>

#include "ctsid/dataset.hpp"
#include "ctsid/errors.hpp"
#include "ctsid/harness.hpp"
#include "ctsid/json_io.hpp"

namespace {

Eigen::MatrixXd white_noise(Eigen::Index N, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd out(N, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index k = 0; k < N; ++k) out(k, c) = dist(eng);
    return out;
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, const std::string& out) {
    const nlohmann::json cfg = ctsid::load_json_file(config_path);
    const ctsid::BenchmarkSpec spec = ctsid::benchmark_from_json(cfg);
    const Eigen::Index N = cfg.contains("N") ? cfg.at("N").get<Eigen::Index>() : 10000;
    ctsid::require(N > 1, ctsid::ErrorCode::BAD_INPUT, "N must exceed 1");

    const ctsid::AdditiveModel model = ctsid::build_three_mass(spec);
    const double h = spec.h();
    const Eigen::MatrixXd v_raw =
        ctsid::gen_noise(N, model.n_y(), spec.noise_num, spec.noise_den, seed ^ 0x9e3779b97f4a7c15ULL);

    ctsid::SampledDataset ds;
    ds.h = h;
    if (spec.loop_mode == ctsid::LoopMode::Open) {
        ds.u = white_noise(N, model.n_u(), seed);
        const Eigen::MatrixXd x = ctsid::simulate_additive(model, ds.u, h);
        const double c = ctsid::calibrate_snr(x, v_raw, spec.snr_db);
        ds.y = x + c * v_raw;
    } else {
        const ctsid::DiscreteController ctrl = ctsid::design_benchmark_controller(model, h);
        const Eigen::MatrixXd r = white_noise(N, model.n_y(), seed);
        const Eigen::MatrixXd u0 = ctsid::noiseless_input(model, ctrl, r, h);
        const Eigen::MatrixXd x0 = ctsid::simulate_additive(model, u0, h);
        const double c = ctsid::calibrate_snr(x0, v_raw, spec.snr_db);
        auto [u, y] = ctsid::simulate_closed_loop(model, ctrl, r, c * v_raw, h);
        ds.u = std::move(u);
        ds.y = std::move(y);
        ds.r = r;
    }
    ctsid::write_dataset_csv(ds, out);
    std::cout << "wrote " << N << " samples to " << out << "\n";
    return 0;
}

int cmd_identify(const std::string& data_path, const std::string& orders_path,
                 const std::string& loop, const std::string& controller_path,
                 const std::string& out) {
    const ctsid::SampledDataset ds = ctsid::read_dataset_csv(data_path);
    const ctsid::AdditiveModel init = ctsid::model_from_json(ctsid::load_json_file(orders_path));
    ctsid::EstimatorOptions opts;
    if (loop == "closed") {
        opts.loop_mode = ctsid::LoopMode::Closed;
        ctsid::require(!controller_path.empty(), ctsid::ErrorCode::MISSING_REFERENCE,
                       "closed-loop identification needs --controller");
        opts.controller =
            ctsid::controller_from_json(ctsid::load_json_file(controller_path));
    } else {
        ctsid::require(loop == "open", ctsid::ErrorCode::BAD_INPUT,
                       "--loop must be open or closed");
    }
    const ctsid::RivResult res = ctsid::riv_solve(init, ds, opts);
    ctsid::save_json_file(ctsid::riv_result_to_json(res), out);
    std::cout << (res.converged ? "converged" : "not converged") << " after " << res.iterations
              << " iterations\n";
    return 0;
}

int cmd_project(const std::string& estimate_path, const std::string& map_name,
                const std::string& out) {
    ctsid::require(map_name == "modal", ctsid::ErrorCode::BAD_INPUT,
                   "unknown map \"" + map_name + "\"");
    const ctsid::RivResult est = ctsid::riv_result_from_json(ctsid::load_json_file(estimate_path));
    const ctsid::ModalMap map(est.model.K(), est.model.n_y(), est.model.n_u());
    const Eigen::VectorXd rho0 = ctsid::modal_init(est.model).pack();
    const ctsid::ProjectionResult res = ctsid::project(est.model.flatten(), est.acov, map, rho0);
    const ctsid::ModalParams params =
        ctsid::ModalParams::unpack(res.rho_hat, map.K(), map.n_y(), map.n_u());
    ctsid::save_json_file(ctsid::structured_to_json(params, res), out);
    std::cout << (res.converged ? "converged" : "not converged") << ", cost " << res.cost << "\n";
    return 0;
}

int cmd_montecarlo(const std::string& config_path, const std::string& out,
                   const std::string& plots_dir) {
    const nlohmann::json cfg = ctsid::load_json_file(config_path);
    const ctsid::BenchmarkSpec spec =
        cfg.contains("benchmark") ? ctsid::benchmark_from_json(cfg.at("benchmark"))
                                  : ctsid::BenchmarkSpec{};
    const ctsid::McConfig mc = ctsid::mc_config_from_json(
        cfg.contains("mc") ? cfg.at("mc") : cfg);
    ctsid::Pipeline pipeline = ctsid::Pipeline::Unstructured;
    if (cfg.contains("pipeline")) {
        const auto p = cfg.at("pipeline").get<std::string>();
        if (p == "unstructured")
            pipeline = ctsid::Pipeline::Unstructured;
        else if (p == "structured")
            pipeline = ctsid::Pipeline::Structured;
        else if (p == "open_on_closed")
            pipeline = ctsid::Pipeline::OpenOnClosed;
        else
            ctsid::fail(ctsid::ErrorCode::BAD_INPUT, "unknown pipeline \"" + p + "\"");
    }
    const ctsid::McResultTable table = ctsid::run_monte_carlo(spec, mc, pipeline);
    ctsid::write_mc_csv(table, out);
    if (!plots_dir.empty()) ctsid::write_mc_svg(table, plots_dir + "/mse.svg");
    std::cout << table.rows.size() << " result rows, " << table.failed_runs << "/"
              << table.total_runs << " runs failed\n";
    return 0;
}

int cmd_plot(const std::string& in, const std::string& out) {
    ctsid::write_mc_svg(ctsid::read_mc_csv(in), out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous-time additive transfer-function identification toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, data_path, orders_path, controller_path;
    std::string loop = "open", map_name = "modal", estimate_path, plots_dir, in_path;
    std::uint64_t seed = 0;

    auto* sim = app.add_subcommand("simulate", "Generate a benchmark dataset");
    sim->add_option("--config", config_path, "Benchmark JSON (optionally with N)")->required();
    sim->add_option("--seed", seed, "RNG seed")->required();
    sim->add_option("--out", out_path, "Output CSV path")->required();

    auto* ident = app.add_subcommand("identify", "Estimate an additive model from a dataset");
    ident->add_option("--data", data_path, "Dataset CSV")->required();
    ident->add_option("--orders", orders_path, "Model JSON fixing orders and the initial iterate")
        ->required();
    ident->add_option("--loop", loop, "open or closed")->required();
    ident->add_option("--controller", controller_path, "Controller JSON (closed loop)");
    ident->add_option("--out", out_path, "Output JSON path")->required();

    auto* proj = app.add_subcommand("project", "Project an estimate onto a structured map");
    proj->add_option("--estimate", estimate_path, "Estimate JSON from identify")->required();
    proj->add_option("--map", map_name, "Structured map name (modal)")->required();
    proj->add_option("--out", out_path, "Output JSON path")->required();

    auto* mc = app.add_subcommand("montecarlo", "Run the benchmark Monte Carlo study");
    mc->add_option("--config", config_path, "Study JSON: benchmark, mc, pipeline")->required();
    mc->add_option("--out", out_path, "Output CSV path")->required();
    mc->add_option("--plots", plots_dir, "Directory for SVG plots");

    auto* plot = app.add_subcommand("plot", "Render a Monte Carlo CSV as an SVG line plot");
    plot->add_option("--in", in_path, "Monte Carlo CSV")->required();
    plot->add_option("--out", out_path, "Output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, seed, out_path);
        if (ident->parsed())
            return cmd_identify(data_path, orders_path, loop, controller_path, out_path);
        if (proj->parsed()) return cmd_project(estimate_path, map_name, out_path);
        if (mc->parsed()) return cmd_montecarlo(config_path, out_path, plots_dir);
        if (plot->parsed()) return cmd_plot(in_path, out_path);
    } catch (const ctsid::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ctsid::is_validation_error(e.code()) ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
