#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "ctsid/dataset.hpp"
#include "ctsid/harness.hpp"
#include "ctsid/json_io.hpp"

using namespace ctsid;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CTSID_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

}  // namespace

TEST_CASE("model serialization round-trips every coefficient exactly") {
    const AdditiveModel model = build_three_mass(BenchmarkSpec{});
    const AdditiveModel back = model_from_json(model_to_json(model));
    CHECK(back.flatten() == model.flatten());
    CHECK(back.K() == model.K());
    CHECK(back.n_u() == model.n_u());

    nlohmann::json j = model_to_json(model);
    j["subsystems"][0]["b"][0][0].erase(1);  // ragged numerator row
    CHECK_THROWS_AS(model_from_json(j), Error);
    nlohmann::json j2 = model_to_json(model);
    j2.erase("subsystems");
    CHECK_THROWS_AS(model_from_json(j2), Error);
}

TEST_CASE("controller and estimate serialization round-trip") {
    const BenchmarkSpec spec;
    const AdditiveModel model = build_three_mass(spec);
    const DiscreteController ctrl = design_benchmark_controller(model, spec.h());
    const DiscreteController cback = controller_from_json(controller_to_json(ctrl));
    CHECK((cback.sys.A - ctrl.sys.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((cback.sys.D - ctrl.sys.D).cwiseAbs().maxCoeff() == 0.0);
    CHECK(cback.sys.h == ctrl.sys.h);

    RivResult res;
    res.model = model;
    res.sigma_hat = Eigen::MatrixXd::Identity(3, 3) * 0.25;
    res.acov = Eigen::MatrixXd::Identity(33, 33);
    res.iterations = 7;
    res.converged = true;
    const RivResult rback = riv_result_from_json(riv_result_to_json(res));
    CHECK(rback.model.flatten() == model.flatten());
    CHECK(rback.sigma_hat(1, 1) == 0.25);
    CHECK(rback.iterations == 7);
    CHECK(rback.converged);
}

TEST_CASE("benchmark and study configs accept partial JSON with defaults") {
    const BenchmarkSpec spec = benchmark_from_json(nlohmann::json{{"snr_db", 20.0}});
    CHECK(spec.snr_db == 20.0);
    CHECK(spec.fs == 100.0);
    CHECK(spec.loop_mode == LoopMode::Open);
    const BenchmarkSpec closed =
        benchmark_from_json(nlohmann::json{{"loop", "closed"}});
    CHECK(closed.loop_mode == LoopMode::Closed);
    CHECK_THROWS_AS(benchmark_from_json(nlohmann::json{{"loop", "sideways"}}), Error);

    nlohmann::json mcj{{"sample_sizes", {1000, 2000}}, {"runs_per_size", 4}};
    const McConfig mc = mc_config_from_json(mcj);
    CHECK(mc.sample_sizes.size() == 2);
    CHECK(mc.tracked_params == benchmark_tracked_params());
    const McConfig mc2 = mc_config_from_json(mc_config_to_json(mc));
    CHECK(mc2.runs_per_size == 4);
    CHECK(mc2.sample_sizes == mc.sample_sizes);
}

TEST_CASE("dataset CSV round-trips bit for bit") {
    const BenchmarkSpec spec;
    const AdditiveModel model = build_three_mass(spec);
    SampledDataset ds;
    ds.h = spec.h();
    ds.u = gen_noise(50, 3, {1.0}, {1.0}, 3);
    ds.y = simulate_additive(model, ds.u, ds.h);
    ds.r = gen_noise(50, 3, {1.0}, {1.0}, 4);
    const std::string path = "dataset_roundtrip_test.csv";
    write_dataset_csv(ds, path);
    const SampledDataset back = read_dataset_csv(path);
    CHECK(back.h == doctest::Approx(ds.h).epsilon(1e-12));
    CHECK((back.u - ds.u).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.y - ds.y).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(back.r.has_value());
    CHECK((*back.r - *ds.r).cwiseAbs().maxCoeff() == 0.0);
    std::remove(path.c_str());

    // open-loop records drop the reference columns
    ds.r.reset();
    write_dataset_csv(ds, path);
    const SampledDataset open_back = read_dataset_csv(path);
    CHECK_FALSE(open_back.r.has_value());
    std::remove(path.c_str());

    CHECK_THROWS_AS(read_dataset_csv("no_such_file.csv"), Error);
}

TEST_CASE("command line pipeline runs end to end") {
    // simulate
    save_json_file(nlohmann::json{{"snr_db", 40.0}, {"N", 800}}, "cli_bench.json");
    CHECK(run_cli("simulate --config cli_bench.json --seed 3 --out cli_data.csv") == 0);
    REQUIRE(file_exists("cli_data.csv"));

    // identify, starting from a perturbed truth
    AdditiveModel init = build_three_mass(BenchmarkSpec{});
    Eigen::VectorXd b = init.flatten();
    b *= 1.01;
    init = init.unflatten(b);
    save_json_file(model_to_json(init), "cli_init.json");
    CHECK(run_cli("identify --data cli_data.csv --orders cli_init.json --loop open "
                  "--out cli_est.json") == 0);
    REQUIRE(file_exists("cli_est.json"));
    const RivResult est = riv_result_from_json(load_json_file("cli_est.json"));
    CHECK(est.model.K() == 3);
    CHECK(est.acov.rows() == 33);

    // project
    CHECK(run_cli("project --estimate cli_est.json --map modal --out cli_proj.json") == 0);
    REQUIRE(file_exists("cli_proj.json"));
    const nlohmann::json proj = load_json_file("cli_proj.json");
    CHECK(proj.at("modes").size() == 3);

    // monte carlo and plot
    save_json_file(
        nlohmann::json{{"benchmark", {{"snr_db", 40.0}}},
                       {"mc",
                        {{"sample_sizes", {800}},
                         {"runs_per_size", 1},
                         {"seed", 1},
                         {"tracked_params", {1, 10}},
                         {"threads", 1}}},
                       {"pipeline", "unstructured"}},
        "cli_mc.json");
    CHECK(run_cli("montecarlo --config cli_mc.json --out cli_mc.csv") == 0);
    REQUIRE(file_exists("cli_mc.csv"));
    CHECK(run_cli("plot --in cli_mc.csv --out cli_mc.svg") == 0);
    CHECK(file_exists("cli_mc.svg"));

    for (const char* f : {"cli_bench.json", "cli_data.csv", "cli_init.json", "cli_est.json",
                          "cli_proj.json", "cli_mc.json", "cli_mc.csv", "cli_mc.svg"})
        std::remove(f);
}

TEST_CASE("command line maps validation and usage problems to exit code 2") {
    CHECK(run_cli("identify --data missing.csv --orders missing.json --loop open "
                  "--out out.json") == 2);
    CHECK(run_cli("simulate --out x.csv") == 2);         // missing required options
    CHECK(run_cli("montecarlo --config definitely_missing.json --out x.csv") == 2);
    CHECK(run_cli("--help") == 0);
}
