#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace spde::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_numerical = 3;

const char* version() noexcept;

// Parses argv, runs one subcommand and writes its artifact to --out or to
// `out`. Errors go to `err` as a JSON object; the return value is the exit
// status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Runs a command from a fully resolved configuration (the object embedded
// in every artifact under "config").
int run_config(const nlohmann::json& config, std::ostream& out, std::ostream& err);

} // namespace spde::cli
