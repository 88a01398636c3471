#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chipdse/costmodel.hpp"
#include "chipdse/pnr.hpp"
#include "chipdse/records.hpp"
#include "chipdse/sa.hpp"
#include "chipdse/scenarios.hpp"

namespace chipdse {

enum class PoolSearch { Sa, Exhaustive };

struct SimSettings {
    std::int64_t inputs = 64;
    std::int64_t tile_bytes = 64 * kKiB;
    int buffer_slots = 2;
    bool shared_bus = false;  // every stage on one bus
};

/// Everything a run can tune. Parsed from the line-oriented format; every
/// record and key is checked, unknown ones are errors.
struct Config {
    ModelParams model;
    std::vector<MemoryModule> memories = default_memory_menu();
    std::vector<ChipletConfig> chiplets;  // empty: the full menu
    std::vector<int> tps = {1, 2};
    std::vector<std::int64_t> batches = {1};
    GaParams ga;
    SaParams sa;
    Aggregation aggregation = Aggregation::GeoMean;
    InnerSearch inner = InnerSearch::Ga;
    PoolSearch pool_search = PoolSearch::Sa;
    std::size_t pool_budget = 4;
    int threads = 1;
    PnrParams pnr;
    SimSettings sim;
    ScenarioParams scenario;

    /// The chiplet menu, rebuilt from the current perf params.
    std::vector<ChipletConfig> chiplet_menu() const;
    void validate() const;
};

/// Returns true when `rec` is a config record and applies it; false when the
/// keyword is not a config keyword. Unknown keys inside a config record throw.
bool apply_config_record(Config& config, const Record& rec);

Config parse_config(std::string_view text, Config base = {});
Config load_config(const std::filesystem::path& path, Config base = {});

/// Canonical text form; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const Config& config);

struct WorkloadEntry {
    std::filesystem::path path;
    std::optional<std::vector<std::int64_t>> batches;
    LatencyConstraints limits;
};

/// A run: which workloads, under which config, objective and seed.
struct RunManifest {
    std::filesystem::path source;  // manifest file, if any
    std::optional<std::filesystem::path> config_path;
    std::vector<WorkloadEntry> workloads;
    Objective objective = Objective::EC;
    std::optional<ScenarioKind> scenario;
    std::uint64_t seed = 1;
    std::filesystem::path out_dir = "out";
    CostMode cost_mode = CostMode::RecurringOnly;
    Config config;  // config file, then inline records in file order
};

/// Paths inside the manifest are relative to its directory.
RunManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
RunManifest load_manifest(const std::filesystem::path& path);

/// Canonical manifest echo written into every result bundle.
std::string dump_manifest(const RunManifest& manifest);

}  // namespace chipdse
