#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spectralflow/ensembles.hpp"

namespace spectralflow {

// Malformed configuration (unknown key, wrong type, out-of-range value,
// missing required field). The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZGridParams {
    double e_min = -4.0;
    double e_max = 4.0;
    int n_e = 33;
    double eta = 0.5;
};

struct RunToggles {
    bool stieltjes = false;    // emit empirical Stieltjes field
    bool pde_checks = false;   // emit closed-form residual suite
    bool holder_diag = false;  // emit regularity diagnostics
    bool fixedpoint = false;   // emit dependent fixed-point sweep
};

// Fully resolved run description. parse_config applies the documented
// defaults, so {} is a valid (smoke-sized) configuration.
struct RunConfig {
    EnsembleSpec ensemble;
    std::vector<std::string> laws{"sc:auto"};
    ZGridParams zgrid;
    int replicas = 1;
    std::uint64_t seed = 1;
    std::string out_dir = "run";
    RunToggles toggles;

    // CLI / environment only, never read from JSON and excluded from the
    // config hash: reruns with different worker counts must hash alike.
    int workers = 0;
    bool quiet = false;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

// Canonical form: every field emitted explicitly, keys sorted (nlohmann
// object order). Hash = FNV-1a of the compact dump.
nlohmann::json config_to_json(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace spectralflow
