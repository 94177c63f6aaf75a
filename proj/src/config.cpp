#include "spectralflow/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "spectralflow/csvio.hpp"
#include "spectralflow/laws.hpp"
#include "spectralflow/pathwise_sde.hpp"

namespace spectralflow {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

double get_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + " must be a number");
    return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
    return j.get<int>();
}

std::string get_string(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + " must be a string");
    return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& where) {
    if (!j.is_boolean()) throw ConfigError(where + " must be a boolean");
    return j.get<bool>();
}

X0Sampler parse_x0(const json& j) {
    require_object(j, "ensemble.x0");
    require_keys(j, "ensemble.x0", {"kind", "a", "sd"});
    X0Sampler x0 = X0Sampler::point(0.0);
    std::string kind = "point";
    if (j.contains("kind")) kind = get_string(j.at("kind"), "ensemble.x0.kind");
    if (kind == "point") {
        x0.kind = X0Sampler::Kind::point;
    } else if (kind == "normal") {
        x0.kind = X0Sampler::Kind::normal;
        x0.sd = 1.0;
    } else {
        throw ConfigError("ensemble.x0.kind must be 'point' or 'normal'");
    }
    if (j.contains("a")) x0.a = get_number(j.at("a"), "ensemble.x0.a");
    if (j.contains("sd")) {
        if (kind == "point") throw ConfigError("ensemble.x0.sd is only valid for kind 'normal'");
        x0.sd = get_number(j.at("sd"), "ensemble.x0.sd");
        if (!(x0.sd > 0.0)) throw ConfigError("ensemble.x0.sd must be positive");
    }
    return x0;
}

std::vector<IndexTerm> parse_index_set(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("ensemble.index_set must be a non-empty array");
    std::vector<IndexTerm> terms;
    for (const auto& e : j) {
        require_object(e, "ensemble.index_set entry");
        require_keys(e, "ensemble.index_set entry", {"r", "a"});
        if (!e.contains("r") || !e.at("r").is_array() || e.at("r").size() != 2)
            throw ConfigError("ensemble.index_set entry needs r = [int, int]");
        IndexTerm term;
        term.r = {get_int(e.at("r")[0], "ensemble.index_set r"),
                  get_int(e.at("r")[1], "ensemble.index_set r")};
        if (e.contains("a")) term.a = get_number(e.at("a"), "ensemble.index_set a");
        if (!std::isfinite(term.a)) throw ConfigError("ensemble.index_set weight must be finite");
        terms.push_back(term);
    }
    return terms;
}

EnsembleSpec parse_ensemble(const json& j) {
    require_object(j, "ensemble");
    require_keys(j, "ensemble",
                 {"variant", "n", "p", "coeffs", "theta", "sigma0", "x0", "index_set", "t_end",
                  "steps", "hurst", "snapshots"});

    EnsembleSpec spec;
    spec.n = 64;
    spec.grid = TimeGrid{1.0, 16};

    if (j.contains("variant")) {
        try {
            spec.variant = parse_variant(get_string(j.at("variant"), "ensemble.variant"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    const bool wishart = spec.variant == EnsembleVariant::wishart_real ||
                         spec.variant == EnsembleVariant::wishart_complex;

    if (j.contains("n")) spec.n = get_int(j.at("n"), "ensemble.n");
    if (spec.n < 1) throw ConfigError("ensemble.n must be >= 1");

    if (j.contains("p")) {
        if (!wishart) throw ConfigError("ensemble.p is only valid for wishart variants");
        spec.p = get_int(j.at("p"), "ensemble.p");
        if (spec.p < 1) throw ConfigError("ensemble.p must be >= 1");
    } else if (wishart) {
        throw ConfigError("ensemble.p is required for wishart variants");
    }

    if (j.contains("index_set")) {
        if (spec.variant != EnsembleVariant::dependent)
            throw ConfigError("ensemble.index_set is only valid for the dependent variant");
        spec.index_set = parse_index_set(j.at("index_set"));
    } else if (spec.variant == EnsembleVariant::dependent) {
        spec.index_set = {{{0, 0}, 1.0}, {{0, 1}, 1.0}};
    }

    if (j.contains("coeffs")) spec.coeffs_name = get_string(j.at("coeffs"), "ensemble.coeffs");
    if (j.contains("theta"))
        spec.preset_params.theta = get_number(j.at("theta"), "ensemble.theta");
    if (j.contains("sigma0"))
        spec.preset_params.sigma0 = get_number(j.at("sigma0"), "ensemble.sigma0");
    if (!(spec.preset_params.sigma0 > 0.0)) throw ConfigError("ensemble.sigma0 must be positive");
    try {
        spec.coeffs = coefficient_preset(spec.coeffs_name, spec.preset_params);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    spec.coeffs2d = diagonal_coefficients_2d(spec.coeffs);

    if (j.contains("x0")) spec.x0 = parse_x0(j.at("x0"));

    double t_end = 1.0;
    int steps = 16;
    if (j.contains("t_end")) t_end = get_number(j.at("t_end"), "ensemble.t_end");
    if (j.contains("steps")) steps = get_int(j.at("steps"), "ensemble.steps");
    if (!(t_end > 0.0)) throw ConfigError("ensemble.t_end must be positive");
    if (steps < 1) throw ConfigError("ensemble.steps must be >= 1");
    spec.grid = TimeGrid{t_end, steps};

    if (j.contains("hurst")) {
        const double h = get_number(j.at("hurst"), "ensemble.hurst");
        try {
            spec.hurst = HurstParameter(h);
        } catch (const std::exception&) {
            throw ConfigError("ensemble.hurst must lie in (1/2, 1)");
        }
    }

    if (j.contains("snapshots")) {
        const json& sj = j.at("snapshots");
        if (!sj.is_array() || sj.empty())
            throw ConfigError("ensemble.snapshots must be a non-empty array of node indices");
        for (const auto& e : sj) {
            const int node = get_int(e, "ensemble.snapshots entry");
            if (node < 0 || node > steps)
                throw ConfigError("ensemble.snapshots entries must lie in [0, steps]");
            if (!spec.snapshot_nodes.empty() && node <= spec.snapshot_nodes.back())
                throw ConfigError("ensemble.snapshots must be strictly increasing");
            spec.snapshot_nodes.push_back(node);
        }
    } else {
        spec.snapshot_nodes = {steps};
    }
    return spec;
}

ZGridParams parse_zgrid(const json& j) {
    require_object(j, "z_grid");
    require_keys(j, "z_grid", {"e_min", "e_max", "n_e", "eta"});
    ZGridParams g;
    if (j.contains("e_min")) g.e_min = get_number(j.at("e_min"), "z_grid.e_min");
    if (j.contains("e_max")) g.e_max = get_number(j.at("e_max"), "z_grid.e_max");
    if (j.contains("n_e")) g.n_e = get_int(j.at("n_e"), "z_grid.n_e");
    if (j.contains("eta")) g.eta = get_number(j.at("eta"), "z_grid.eta");
    if (!(g.e_min < g.e_max)) throw ConfigError("z_grid.e_min must be below z_grid.e_max");
    if (g.n_e < 1) throw ConfigError("z_grid.n_e must be >= 1");
    if (!(g.eta > 0.0)) throw ConfigError("z_grid.eta must be positive");
    return g;
}

RunToggles parse_toggles(const json& j) {
    require_object(j, "toggles");
    require_keys(j, "toggles", {"stieltjes", "pde_checks", "holder_diag", "fixedpoint"});
    RunToggles t;
    if (j.contains("stieltjes")) t.stieltjes = get_bool(j.at("stieltjes"), "toggles.stieltjes");
    if (j.contains("pde_checks"))
        t.pde_checks = get_bool(j.at("pde_checks"), "toggles.pde_checks");
    if (j.contains("holder_diag"))
        t.holder_diag = get_bool(j.at("holder_diag"), "toggles.holder_diag");
    if (j.contains("fixedpoint"))
        t.fixedpoint = get_bool(j.at("fixedpoint"), "toggles.fixedpoint");
    return t;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& doc) {
    require_object(doc, "config");
    require_keys(doc, "config",
                 {"ensemble", "laws", "z_grid", "replicas", "seed", "out_dir", "toggles"});

    RunConfig cfg;
    cfg.ensemble = doc.contains("ensemble") ? parse_ensemble(doc.at("ensemble"))
                                            : parse_ensemble(json::object());

    if (doc.contains("laws")) {
        const json& lj = doc.at("laws");
        if (!lj.is_array() || lj.empty())
            throw ConfigError("laws must be a non-empty array of law ids");
        cfg.laws.clear();
        for (const auto& e : lj) {
            const std::string id = get_string(e, "laws entry");
            try {
                parse_law_id(id);
            } catch (const std::exception& ex) {
                throw ConfigError(std::string("bad law id '") + id + "': " + ex.what());
            }
            cfg.laws.push_back(id);
        }
    }

    if (doc.contains("z_grid")) cfg.zgrid = parse_zgrid(doc.at("z_grid"));
    if (doc.contains("toggles")) cfg.toggles = parse_toggles(doc.at("toggles"));

    if (doc.contains("replicas")) {
        cfg.replicas = get_int(doc.at("replicas"), "replicas");
        if (cfg.replicas < 1) throw ConfigError("replicas must be >= 1");
    }
    if (doc.contains("seed")) {
        const json& sj = doc.at("seed");
        if (!sj.is_number_integer()) throw ConfigError("seed must be a non-negative integer");
        if (!sj.is_number_unsigned() && sj.get<std::int64_t>() < 0)
            throw ConfigError("seed must be a non-negative integer");
        cfg.seed = sj.get<std::uint64_t>();
    }
    if (doc.contains("out_dir")) {
        cfg.out_dir = get_string(doc.at("out_dir"), "out_dir");
        if (cfg.out_dir.empty()) throw ConfigError("out_dir must be non-empty");
    }

    cfg.ensemble.seed = cfg.seed;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(doc);
}

nlohmann::json config_to_json(const RunConfig& cfg) {
    using nlohmann::json;
    const EnsembleSpec& s = cfg.ensemble;

    json ens;
    ens["variant"] = variant_name(s.variant);
    ens["n"] = s.n;
    if (s.variant == EnsembleVariant::wishart_real ||
        s.variant == EnsembleVariant::wishart_complex)
        ens["p"] = s.p;
    ens["coeffs"] = s.coeffs_name;
    ens["theta"] = s.preset_params.theta;
    ens["sigma0"] = s.preset_params.sigma0;
    ens["x0"] = {{"kind", s.x0.kind == X0Sampler::Kind::point ? "point" : "normal"},
                 {"a", s.x0.a}};
    if (s.x0.kind == X0Sampler::Kind::normal) ens["x0"]["sd"] = s.x0.sd;
    if (s.variant == EnsembleVariant::dependent) {
        json terms = json::array();
        for (const auto& term : s.index_set)
            terms.push_back({{"r", {term.r[0], term.r[1]}}, {"a", term.a}});
        ens["index_set"] = terms;
    }
    ens["t_end"] = s.grid.t_end;
    ens["steps"] = s.grid.steps;
    ens["hurst"] = s.hurst.value();
    ens["snapshots"] = s.snapshot_nodes;

    json doc;
    doc["ensemble"] = ens;
    doc["laws"] = cfg.laws;
    doc["z_grid"] = {{"e_min", cfg.zgrid.e_min},
                     {"e_max", cfg.zgrid.e_max},
                     {"n_e", cfg.zgrid.n_e},
                     {"eta", cfg.zgrid.eta}};
    doc["replicas"] = cfg.replicas;
    doc["seed"] = cfg.seed;
    doc["toggles"] = {{"stieltjes", cfg.toggles.stieltjes},
                      {"pde_checks", cfg.toggles.pde_checks},
                      {"holder_diag", cfg.toggles.holder_diag},
                      {"fixedpoint", cfg.toggles.fixedpoint}};
    return doc;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(config_to_json(cfg).dump()); }

}  // namespace spectralflow
