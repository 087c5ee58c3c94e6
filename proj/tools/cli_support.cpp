#include "cli_support.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <set>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pxpscar/version.hpp"

namespace pxp::cli {

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::Unsupported:
            return kUsage;
        case ErrorKind::TooLarge:
            return kResourceCap;
        case ErrorKind::NumericFailure:
        case ErrorKind::InsufficientData:
        case ErrorKind::WindowTooSmall:
        case ErrorKind::NonUnimodal:
        case ErrorKind::DegenerateCoupling:
        case ErrorKind::InternalInconsistency:
            return kNumeric;
    }
    return kNumeric;
}

namespace {

// Distinct (package, core) pairs from sysfs; 0 when unavailable.
int physical_cores() {
    namespace fs = std::filesystem;
    std::set<std::pair<std::string, std::string>> cores;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator("/sys/devices/system/cpu", ec)) {
        const auto name = entry.path().filename().string();
        if (name.size() < 4 || name.rfind("cpu", 0) != 0 ||
            !std::all_of(name.begin() + 3, name.end(), [](char c) { return c >= '0' && c <= '9'; }))
            continue;
        std::ifstream pkg(entry.path() / "topology/physical_package_id");
        std::ifstream core(entry.path() / "topology/core_id");
        std::string p, c;
        if (pkg >> p && core >> c) cores.emplace(p, c);
    }
    return static_cast<int>(cores.size());
}

}  // namespace

int apply_threads(int requested) {
    require(requested >= 0, "--threads must be >= 0");
#ifdef _OPENMP
    int n = requested;
    if (n == 0) {
        const int available = omp_get_num_procs();
        const int physical = physical_cores();
        n = physical > 0 ? std::min(physical, available) : available;
    }
    omp_set_num_threads(std::max(n, 1));
    return std::max(n, 1);
#else
    (void)requested;
    return 1;
#endif
}

CouplingSet load_couplings_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open coupling file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidArgument, "coupling file '" + path + "' is not valid JSON: " + e.what());
    }
    if (j.is_object() && j.contains("couplings")) j = j.at("couplings");
    if (j.is_array()) {
        std::vector<double> values;
        try {
            values = j.get<std::vector<double>>();
        } catch (const nlohmann::json::exception&) {
            fail(ErrorKind::InvalidArgument, "coupling array in '" + path + "' must hold numbers");
        }
        return CouplingSet::manual(std::move(values));
    }
    require(j.is_object(), "coupling file '" + path + "' must hold an object or an array");
    return couplings_from_json(j);
}

CouplingSet resolve_couplings(const CouplingChoice& c, int n_sites) {
    if (c.source == "none") return CouplingSet::none();
    if (c.source == "ansatz") {
        const int range = c.range > 0 ? c.range : n_sites / 2;
        return ansatz_couplings(solve_constraint().h0, range);
    }
    if (c.source == "file") {
        require(!c.file.empty(), "--couplings file needs --couplings-file");
        return load_couplings_file(c.file);
    }
    fail(ErrorKind::InvalidArgument, "unknown coupling source '" + c.source + "'");
}

nlohmann::json to_json(const CouplingChoice& c) {
    nlohmann::json j{{"source", c.source}};
    if (c.source == "file") j["file"] = c.file;
    if (c.source == "ansatz") j["range"] = c.range;
    return j;
}

Run::Run(std::string subcommand, const GlobalOptions& g)
    : subcommand_(std::move(subcommand)), global_(g), start_(std::chrono::steady_clock::now()) {
    std::string dir = g.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("PXPSCAR_OUTPUT_DIR");
        dir = env && *env ? env : "pxpscar-out";
    }
    out_dir_ = dir;
    stem_ = g.tag.empty() ? subcommand_ : subcommand_ + "-" + g.tag;
}

std::filesystem::path Run::path_for(const std::string& suffix) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir_, ec);
    require(!ec, "cannot create output directory '" + out_dir_.string() + "': " + ec.message());
    const auto name = stem_ + "." + suffix;
    require(std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end(), "duplicate output " + name);
    outputs_.push_back(name);
    return out_dir_ / name;
}

std::ofstream Run::open(const std::string& suffix) {
    const auto path = path_for(suffix);
    std::ofstream os(path);
    require(static_cast<bool>(os), "cannot write '" + path.string() + "'");
    os.precision(17);
    return os;
}

void Run::write_json(const std::string& suffix, const nlohmann::json& j) {
    auto os = open(suffix);
    os << j.dump(2) << '\n';
}

Run::~Run() {
    if (finished_ || outputs_.empty()) return;
    try {
        write_manifest("failed");
    } catch (...) {
    }
}

std::filesystem::path Run::write_manifest(const std::string& status) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const nlohmann::json manifest{{"subcommand", subcommand_},
                                  {"status", status},
                                  {"params", params},
                                  {"version", library_version()},
                                  {"seed", seed},
                                  {"threads", global_.threads},
                                  {"tag", global_.tag},
                                  {"wall_seconds", wall},
                                  {"outputs", outputs_},
                                  {"tolerances", tolerances}};
    const auto path = out_dir_ / (stem_ + ".manifest.json");
    std::error_code ec;
    std::filesystem::create_directories(out_dir_, ec);
    std::ofstream os(path);
    require(static_cast<bool>(os), "cannot write '" + path.string() + "'");
    os << manifest.dump(2) << '\n';
    return path;
}

void Run::finish(const nlohmann::json& summary) {
    finished_ = true;
    const auto path = write_manifest("ok");

    nlohmann::json out = summary;
    out["manifest"] = path.string();
    if (global_.json) {
        std::cout << out.dump(2) << '\n';
        return;
    }
    for (const auto& [key, value] : out.items())
        std::cout << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
}

}  // namespace pxp::cli
