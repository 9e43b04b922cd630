#pragma once
/** \file
 * Batch front-end: every analysis as a pure function from a RunConfig to a
 * result document, plus the argv-level driver used by the binary.
 *
 * Commands never print; they return the rendered document (JSON or CSV)
 * and optional attachment files, so they are directly unit-testable and
 * byte-reproducible.  Exit codes: 0 success, 1 claim-verification failure
 * (or a numeric failure inside a pipeline), 2 input error.
 */
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace hqt::cli {

struct RunConfig {
    nlohmann::json params = nlohmann::json::object();  ///< subcommand options
    uint64_t seed = 0;
    std::string out_path;          ///< empty = stdout
    std::string format = "json";   ///< "json" or "csv"
};

/// One verified statement of the claim batteries.
struct Claim {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CmdResult {
    int exit_code = 0;
    std::string output;  ///< rendered document in the requested format
    std::string error;   ///< diagnostic for nonzero exit codes
    /// Extra files keyed by filename suffix (written as <out>.<suffix>).
    std::vector<std::pair<std::string, std::string>> attachments;
    std::vector<Claim> claims;
};

/// CSV rendering of claim lists and of flat quantity/value tables, with the
/// matching parsers so every emitted table round-trips in-process.  Fields
/// must not contain commas (enforced with precondition_error).
std::string claims_csv(const std::vector<Claim>& claims);
std::vector<Claim> claims_from_csv(const std::string& text);
std::string kv_csv(const std::vector<std::pair<std::string, std::string>>& rows);
std::vector<std::pair<std::string, std::string>> kv_from_csv(
    const std::string& text);

/// Algebraic universality battery: which coupling types make the
/// control+hidden pair fully controllable.
std::vector<Claim> controllability_battery();

/// Measurement-reachability battery: which gate sets conjugate the native
/// operators onto all 16 two-qubit Paulis.
std::vector<Claim> reachability_battery();

CmdResult cmd_controllability(const RunConfig& cfg);
CmdResult cmd_reachability(const RunConfig& cfg);
CmdResult cmd_tuneup(const RunConfig& cfg);
CmdResult cmd_qpt(const RunConfig& cfg);
CmdResult cmd_qv_map(const RunConfig& cfg);
CmdResult cmd_route_demo(const RunConfig& cfg);

/// Dispatches by subcommand name and maps exceptions to exit codes:
/// input/validation problems give 2, numeric failures inside a pipeline
/// give 1, with the message in CmdResult::error.
CmdResult run_command(const std::string& name, const RunConfig& cfg);

/// Parses argv, dispatches, writes output files, prints the document (or
/// claim lines) to stdout, and returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace hqt::cli
