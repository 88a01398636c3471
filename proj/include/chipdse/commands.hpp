#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "chipdse/config.hpp"

namespace chipdse {

/// Output files of one command, by relative path. Written in key order so a
/// bundle is byte-identical whenever its inputs are.
using Bundle = std::map<std::string, std::string>;

void write_bundle(const std::filesystem::path& dir, const Bundle& bundle);

/// Workloads of the manifest as search targets. With a scenario, the graphs
/// carry the scenario's limits and batch menus.
std::vector<NetworkTarget> manifest_networks(const RunManifest& manifest);

ScoringParams scoring_params(const RunManifest& manifest);

/// Pool search, per-network designs, place and route and metrics.
Bundle cmd_dse(const RunManifest& manifest);

enum class Paradigm { HomogeneousAsicAll, HomogeneousNsic, HeterogeneousPool, HeterogeneousUnconstrained };
Paradigm parse_paradigm(std::string_view text);
std::string_view to_string(Paradigm p);
std::vector<Paradigm> all_paradigms();

struct ParadigmResult {
    Paradigm paradigm = Paradigm::HomogeneousAsicAll;
    std::vector<GaResult> designs;       // per network
    std::vector<MetricSet> metrics;      // per network
    std::vector<std::size_t> ecosystem;  // chiplet designs charged to each network
};

/// Designs for each paradigm, in the order given.
std::vector<ParadigmResult> run_paradigms(const RunManifest& manifest, const std::vector<Paradigm>& paradigms);

/// compare.csv (per network and a geometric-mean row, normalized to
/// homogeneous-asic-all when present) and gap.csv.
Bundle cmd_compare(const RunManifest& manifest, const std::vector<Paradigm>& paradigms);

/// Die, memory, packaging and amortized NRE per unit at 1M, 2M and 3M units,
/// for the shared pool and for one unique chiplet set per network.
Bundle cmd_cost(const RunManifest& manifest, const std::vector<double>& volumes = {1e6, 2e6, 3e6});

/// Candidate table CSV with header `stage,t_cmp,e_dyn,p_static,dollar_cost`.
StageTable parse_stage_table(std::string_view csv);
Bundle cmd_solve_stages(const StageTable& table, StageSolver solver, Objective objective, const LatencyCap& cap);

/// Simulates each network's design with private buses, plus a shared bus
/// when the sim settings ask for it.
Bundle cmd_simulate(const RunManifest& manifest, bool trace);

/// Places and routes each network's design; `dump` adds text and JSON layouts.
Bundle cmd_pnr(const RunManifest& manifest, bool dump);

}  // namespace chipdse
