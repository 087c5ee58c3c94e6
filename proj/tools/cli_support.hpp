#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pxpscar/errors.hpp"
#include "pxpscar/operators.hpp"

namespace pxp::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 2, kNumeric = 3, kResourceCap = 4 };

int exit_code(ErrorKind kind) noexcept;

/// Options shared by every subcommand.
struct GlobalOptions {
    bool json = false;
    std::string out_dir;  ///< empty: $PXPSCAR_OUTPUT_DIR, else "pxpscar-out"
    std::string tag;
    int threads = 0;      ///< 0: one per physical core
};

/// Applies the thread count and returns the value in effect.
int apply_threads(int requested);

/// Couplings chosen on the command line.
struct CouplingChoice {
    std::string source = "ansatz";  ///< none | ansatz | file
    std::string file;
    int range = 0;                  ///< ansatz range, 0: N/2
};

/// Reads a coupling file. Accepted JSON shapes: an optimize result (its
/// "couplings" member), {"range": R, "h": {"2": h2, ...}}, or [h2, h3, ...].
/// Malformed input throws InvalidArgument.
CouplingSet load_couplings_file(const std::string& path);
CouplingSet resolve_couplings(const CouplingChoice& c, int n_sites);
nlohmann::json to_json(const CouplingChoice& c);

/// One invocation: collects output files and writes the manifest.
class Run {
public:
    Run(std::string subcommand, const GlobalOptions& g);
    /// A run that stops early still gets a manifest, with status "failed",
    /// when it wrote any file.
    ~Run();
    Run(const Run&) = delete;
    Run& operator=(const Run&) = delete;

    nlohmann::json params = nlohmann::json::object();
    nlohmann::json tolerances = nlohmann::json::object();
    std::uint64_t seed = 0;

    /// Opens <out>/<stem>.<suffix> for writing and registers it.
    std::ofstream open(const std::string& suffix);
    /// Writes pretty JSON with a trailing newline and registers the file.
    void write_json(const std::string& suffix, const nlohmann::json& j);

    /// Writes the manifest, then prints the summary (JSON with --json, else
    /// one "key: value" line per entry).
    void finish(const nlohmann::json& summary);

    const std::filesystem::path& out_dir() const noexcept { return out_dir_; }

private:
    std::filesystem::path path_for(const std::string& suffix);
    std::filesystem::path write_manifest(const std::string& status);

    std::string subcommand_;
    GlobalOptions global_;
    std::filesystem::path out_dir_;
    std::string stem_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
    bool finished_ = false;
};

}  // namespace pxp::cli
