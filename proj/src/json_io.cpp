#include "ctsid/json_io.hpp"

#include <fstream>

#include "ctsid/errors.hpp"

namespace ctsid {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* what) {
    require(j.is_array(), ErrorCode::BAD_INPUT, std::string(what) + ": expected a nested array");
    const auto nr = static_cast<Eigen::Index>(j.size());
    if (nr == 0) return Eigen::MatrixXd(0, 0);
    require(j[0].is_array(), ErrorCode::BAD_INPUT, std::string(what) + ": expected a nested array");
    const auto nc = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(nr, nc);
    for (Eigen::Index r = 0; r < nr; ++r) {
        require(j[static_cast<size_t>(r)].is_array() &&
                    static_cast<Eigen::Index>(j[static_cast<size_t>(r)].size()) == nc,
                ErrorCode::BAD_INPUT, std::string(what) + ": ragged rows");
        for (Eigen::Index c = 0; c < nc; ++c)
            m(r, c) = j[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
    }
    return m;
}

std::vector<double> doubles_from_json(const nlohmann::json& j, const char* what) {
    require(j.is_array(), ErrorCode::BAD_INPUT, std::string(what) + ": expected an array");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

const nlohmann::json& at(const nlohmann::json& j, const char* key) {
    require(j.contains(key), ErrorCode::BAD_INPUT, std::string("missing field \"") + key + "\"");
    return j.at(key);
}

}  // namespace

nlohmann::json model_to_json(const AdditiveModel& model) {
    nlohmann::json j;
    j["n_u"] = model.n_u();
    j["n_y"] = model.n_y();
    nlohmann::json subs = nlohmann::json::array();
    for (const auto& s : model.subs) {
        nlohmann::json js;
        nlohmann::json a = nlohmann::json::array();
        for (size_t i = 1; i < s.den.c.size(); ++i) a.push_back(s.den.c[i]);
        js["a"] = std::move(a);
        nlohmann::json b = nlohmann::json::array();
        for (const auto& B : s.num.coef) b.push_back(matrix_to_json(B));
        js["b"] = std::move(b);
        subs.push_back(std::move(js));
    }
    j["subsystems"] = std::move(subs);
    return j;
}

AdditiveModel model_from_json(const nlohmann::json& j) {
    const auto n_u = at(j, "n_u").get<Eigen::Index>();
    const auto n_y = at(j, "n_y").get<Eigen::Index>();
    require(n_u > 0 && n_y > 0, ErrorCode::BAD_INPUT, "model dimensions must be positive");
    const auto& jsubs = at(j, "subsystems");
    require(jsubs.is_array() && !jsubs.empty(), ErrorCode::BAD_INPUT,
            "model needs at least one subsystem");
    std::vector<Subsystem> subs;
    for (const auto& js : jsubs) {
        Subsystem s;
        std::vector<double> a = doubles_from_json(at(js, "a"), "subsystem a");
        a.insert(a.begin(), 1.0);
        s.den = ScalarPoly(a);
        const auto& jb = at(js, "b");
        require(jb.is_array() && !jb.empty(), ErrorCode::BAD_INPUT,
                "subsystem needs at least one numerator coefficient");
        std::vector<Eigen::MatrixXd> coeffs;
        for (const auto& jB : jb) {
            Eigen::MatrixXd B = matrix_from_json(jB, "numerator coefficient");
            require(B.rows() == n_y && B.cols() == n_u, ErrorCode::DIM_MISMATCH,
                    "numerator coefficient shape disagrees with n_y x n_u");
            coeffs.push_back(std::move(B));
        }
        s.num = MatrixPoly(std::move(coeffs));
        subs.push_back(std::move(s));
    }
    return AdditiveModel(std::move(subs));
}

nlohmann::json controller_to_json(const DiscreteController& ctrl) {
    nlohmann::json j;
    j["A"] = matrix_to_json(ctrl.sys.A);
    j["B"] = matrix_to_json(ctrl.sys.B);
    j["C"] = matrix_to_json(ctrl.sys.C);
    j["D"] = matrix_to_json(ctrl.sys.D);
    j["h"] = ctrl.sys.h;
    return j;
}

DiscreteController controller_from_json(const nlohmann::json& j) {
    DiscreteController ctrl;
    ctrl.sys.A = matrix_from_json(at(j, "A"), "A");
    ctrl.sys.B = matrix_from_json(at(j, "B"), "B");
    ctrl.sys.C = matrix_from_json(at(j, "C"), "C");
    ctrl.sys.D = matrix_from_json(at(j, "D"), "D");
    ctrl.sys.h = at(j, "h").get<double>();
    ctrl.sys.domain = StateSpace::Domain::Discrete;
    ctrl.validate();
    return ctrl;
}

nlohmann::json riv_result_to_json(const RivResult& result) {
    nlohmann::json j = model_to_json(result.model);
    j["sigma"] = matrix_to_json(result.sigma_hat);
    j["acov"] = matrix_to_json(result.acov);
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    return j;
}

RivResult riv_result_from_json(const nlohmann::json& j) {
    RivResult r;
    r.model = model_from_json(j);
    r.sigma_hat = matrix_from_json(at(j, "sigma"), "sigma");
    r.acov = matrix_from_json(at(j, "acov"), "acov");
    r.iterations = at(j, "iterations").get<int>();
    r.converged = at(j, "converged").get<bool>();
    return r;
}

nlohmann::json structured_to_json(const ModalParams& params, const ProjectionResult& result) {
    nlohmann::json j;
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : params.modes) {
        nlohmann::json jm;
        jm["xi"] = m.xi;
        jm["omega"] = m.omega;
        nlohmann::json pl = nlohmann::json::array(), pr = nlohmann::json::array();
        for (Eigen::Index i = 0; i < m.psi_l.size(); ++i) pl.push_back(m.psi_l(i));
        for (Eigen::Index i = 0; i < m.psi_r.size(); ++i) pr.push_back(m.psi_r(i));
        jm["psi_l"] = std::move(pl);
        jm["psi_r"] = std::move(pr);
        modes.push_back(std::move(jm));
    }
    j["modes"] = std::move(modes);
    j["ps"] = matrix_to_json(result.ps);
    j["cost"] = result.cost;
    j["converged"] = result.converged;
    j["singular_jacobian"] = result.singular_jacobian;
    return j;
}

nlohmann::json benchmark_to_json(const BenchmarkSpec& spec) {
    nlohmann::json j;
    j["masses"] = spec.masses;
    j["springs"] = spec.springs;
    j["damping_ratio"] = spec.damping_ratio;
    j["fs"] = spec.fs;
    j["loop"] = spec.loop_mode == LoopMode::Closed ? "closed" : "open";
    j["noise_num"] = spec.noise_num;
    j["noise_den"] = spec.noise_den;
    j["snr_db"] = spec.snr_db;
    return j;
}

BenchmarkSpec benchmark_from_json(const nlohmann::json& j) {
    BenchmarkSpec spec;
    if (j.contains("masses")) spec.masses = doubles_from_json(j.at("masses"), "masses");
    if (j.contains("springs")) spec.springs = doubles_from_json(j.at("springs"), "springs");
    if (j.contains("damping_ratio")) spec.damping_ratio = j.at("damping_ratio").get<double>();
    if (j.contains("fs")) spec.fs = j.at("fs").get<double>();
    if (j.contains("loop")) {
        const auto s = j.at("loop").get<std::string>();
        require(s == "open" || s == "closed", ErrorCode::BAD_INPUT,
                "loop must be \"open\" or \"closed\"");
        spec.loop_mode = s == "closed" ? LoopMode::Closed : LoopMode::Open;
    }
    if (j.contains("noise_num")) spec.noise_num = doubles_from_json(j.at("noise_num"), "noise_num");
    if (j.contains("noise_den")) spec.noise_den = doubles_from_json(j.at("noise_den"), "noise_den");
    if (j.contains("snr_db")) spec.snr_db = j.at("snr_db").get<double>();
    require(spec.fs > 0.0, ErrorCode::BAD_INPUT, "fs must be positive");
    return spec;
}

nlohmann::json mc_config_to_json(const McConfig& mc) {
    nlohmann::json j;
    nlohmann::json sizes = nlohmann::json::array();
    for (auto n : mc.sample_sizes) sizes.push_back(n);
    j["sample_sizes"] = std::move(sizes);
    j["runs_per_size"] = mc.runs_per_size;
    j["seed"] = mc.seed;
    j["init_perturbation"] = mc.init_perturbation;
    j["tracked_params"] = mc.tracked_params;
    j["threads"] = mc.threads;
    return j;
}

McConfig mc_config_from_json(const nlohmann::json& j) {
    McConfig mc;
    for (const auto& v : at(j, "sample_sizes"))
        mc.sample_sizes.push_back(v.get<Eigen::Index>());
    mc.runs_per_size = at(j, "runs_per_size").get<int>();
    if (j.contains("seed")) mc.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("init_perturbation"))
        mc.init_perturbation = j.at("init_perturbation").get<double>();
    if (j.contains("tracked_params"))
        mc.tracked_params = j.at("tracked_params").get<std::vector<int>>();
    else
        mc.tracked_params = benchmark_tracked_params();
    if (j.contains("threads")) mc.threads = j.at("threads").get<int>();
    mc.validate();
    return mc;
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), ErrorCode::BAD_INPUT, "cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::BAD_INPUT, path + ": " + e.what());
    }
    return j;
}

void save_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), ErrorCode::BAD_INPUT, "cannot open " + path + " for writing");
    f << j.dump(2) << "\n";
    require(f.good(), ErrorCode::BAD_INPUT, "write to " + path + " failed");
}

}  // namespace ctsid
