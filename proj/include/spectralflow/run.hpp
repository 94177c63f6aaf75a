#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "spectralflow/config.hpp"

namespace spectralflow {

inline constexpr const char* kToolVersion = "0.1.0";

// What a subcommand produced: the run directory, the manifest that was (or
// already had been) written there, and per-file checksums.
struct RunArtifact {
    std::string out_dir;
    std::uint64_t config_hash = 0;
    std::map<std::string, std::uint64_t> checksums;
    nlohmann::json manifest;
};

// Library-level subcommands. All throw ConfigError for malformed input /
// unusable run directories and other std::exception for numerical failures;
// run_cli maps those to exit codes 2 and 3.
RunArtifact cmd_simulate(const RunConfig& cfg);
RunArtifact cmd_compare(const std::string& run_dir, const std::string& law_id, bool quiet = true);
RunArtifact cmd_fixedpoint(const RunConfig& cfg);
RunArtifact cmd_stieltjes(const RunConfig& cfg);
RunArtifact cmd_holder(const RunConfig& cfg);
RunArtifact cmd_report(const std::string& run_dir, bool quiet = true);

// Full CLI: subcommands simulate/compare/fixedpoint/stieltjes/holder/report
// with --config/--seed/--workers/--out/--quiet. Returns the process exit
// code (0 ok, 2 config error, 3 numerical error).
int run_cli(int argc, const char* const* argv);

}  // namespace spectralflow
