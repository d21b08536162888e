#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace kernlyap::cli {

using nlohmann::json;

/// Exit codes: 0 success, 2 usage/validation, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Default configuration of a subcommand (gen, diag, fit-vf, fit-lyap, verify).
json default_config(const std::string& command);

// Each command takes a fully merged config, writes its outputs and returns
// the JSON document it wrote (or printed).
json cmd_gen(const json& config);
json cmd_diag(const json& config);
json cmd_fit_vf(const json& config);
json cmd_fit_lyap(const json& config);
json cmd_verify(const json& config);

/// Parses argv-style arguments (without the program name), merges defaults,
/// --config file and explicit flags, runs the command and maps errors to
/// exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kernlyap::cli
