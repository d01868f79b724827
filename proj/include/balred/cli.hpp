#pragma once

// Command-line front end: Matrix Market I/O, run manifests and the sweep,
// certify and hsv subcommands. Commands return process exit codes.

#include "balred/bench.hpp"
#include "balred/bounds.hpp"
#include "balred/linalg.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace balred::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitUnstable = 4,
};

/// Reads `array` or `coordinate` real/integer matrices (general or symmetric).
/// Throws ConfigError on malformed files.
Matrix read_matrix_market(const std::filesystem::path& path);
Matrix parse_matrix_market(std::istream& is, const std::string& origin = "<stream>");

/// Dense `array real general` output with 17 significant digits.
void write_matrix_market(const std::filesystem::path& path, const Matrix& m);

/// One real per non-blank line.
Vector read_vector(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

struct RunManifest {
    std::string subcommand;
    std::string tool_version = kToolVersion;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> config;  // resolved key/value
    std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
};

std::string format_manifest(const RunManifest& m);
RunManifest parse_manifest(const std::string& text);

/// True when every input digest recorded in the manifest matches the file.
bool verify_manifest(const RunManifest& m, std::vector<std::string>* mismatches = nullptr);

/// BALRED_THREADS, 0 when unset. Throws ConfigError on a malformed value.
unsigned threads_from_env();

struct SweepArgs {
    std::filesystem::path config;
    std::filesystem::path out_dir = ".";
    std::vector<std::pair<std::string, std::string>> overrides;
};

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

struct SystemFiles {
    std::filesystem::path a;
    std::filesystem::path c;
    std::filesystem::path gamma_eps;
    std::filesystem::path l_pr;
    std::optional<std::filesystem::path> mu_pr;
};

struct CertifyArgs {
    SystemFiles files;
    std::filesystem::path data;
    double dt = 0.0;
    std::size_t n = 0;
    std::optional<double> horizon;
    std::size_t rank = 0;
    std::string variant = "pdbt";
    bool json = false;
};

int cmd_certify(const CertifyArgs& args, std::ostream& out, std::ostream& err);

struct HsvArgs {
    SystemFiles files;
    std::string variant = "pdbt";
    std::optional<double> horizon;
};

int cmd_hsv(const HsvArgs& args, std::ostream& out, std::ostream& err);

/// `key = value` report lines in a fixed key order.
std::string format_report(const BoundReport& rep);
std::string format_report_json(const BoundReport& rep);

}  // namespace balred::cli
