#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "chipdse/cht.hpp"

namespace chipdse {

/// Menus the inner searches may draw from for one network.
struct DesignSpace {
    std::vector<ChipletConfig> pool;
    std::vector<MemoryModule> memories = default_memory_menu();
    std::vector<int> tps = {1, 2};
    std::vector<std::int64_t> batches = {1};
    ModelParams model;
};

/// Deployment limits. `max_e2e` bounds the time one sample spends in the
/// pipeline; `max_period` bounds the time between consecutive batches.
struct LatencyConstraints {
    double max_e2e = std::numeric_limits<double>::infinity();
    double max_period = std::numeric_limits<double>::infinity();
};

/// Extra per-sample periods charged for regrouping samples between stages
/// of different batch: ceil(log2(ratio)) batch periods per boundary.
double reaccumulation_periods(const std::vector<std::int64_t>& group_batches);

/// Time one sample spends in the pipeline, in per-sample periods.
double e2e_factor(const std::vector<std::int64_t>& group_batches);
/// Batch period in per-sample periods (the largest batch).
double period_factor(const std::vector<std::int64_t>& group_batches);

LatencyCap latency_cap(const std::vector<std::int64_t>& group_batches,
                       const LatencyConstraints& limits);

/// Cut set over the topological order plus per-node memory and batch genes.
/// A group takes the genes of its first node.
struct FusionGenome {
    std::vector<bool> cuts;
    std::vector<int> memory;
    std::vector<int> batch;

    friend bool operator==(const FusionGenome&, const FusionGenome&) = default;
    friend bool operator<(const FusionGenome& a, const FusionGenome& b) {
        return std::tie(a.cuts, a.memory, a.batch) < std::tie(b.cuts, b.memory, b.batch);
    }
};

std::vector<FusionGroup> genome_groups(const FusionGenome& genome);

/// True when some pool chiplet passes the buffer, capacity and reticle gates.
bool group_feasible(const GroupProfile& profile, const DesignSpace& space, int memory_index);

/// Splits groups greedily (longest feasible prefix first) until every group
/// can be mapped, repairs single-node memory genes, and copies each group's
/// leading genes onto its members. nullopt when some node fits nowhere.
std::optional<FusionGenome> legalize_genome(FusionGenome genome, const OperatorGraph& graph,
                                            const DesignSpace& space);

/// Cheapest memory that leaves the group's T_cmp unchanged relative to the
/// fastest memory, on the pool chiplet with the highest effective throughput.
int roofline_memory(const GroupProfile& profile, const DesignSpace& space, std::int64_t batch);

struct GaParams {
    int population = 10;
    int generations = 10;  // including the seeded generation
    double mutation_rate = 0.2;
    double crossover_rate = 0.8;
    int tournament = 2;
    std::uint64_t seed = 1;
    int threads = 1;
};

std::vector<FusionGenome> seed_population(const OperatorGraph& graph, const DesignSpace& space,
                                          const GaParams& params);

/// Stage table for a legal genome: pool x {gene memory} x tp x {gene batch}.
StageTable genome_stage_table(const FusionGenome& genome, const OperatorGraph& graph,
                              const DesignSpace& space);

struct GenomeFitness {
    double objective = std::numeric_limits<double>::infinity();
    std::optional<AcceleratorDesign> design;
};

GenomeFitness evaluate_genome(const FusionGenome& genome, const OperatorGraph& graph,
                              const DesignSpace& space, Objective objective,
                              const LatencyConstraints& limits);

struct GaResult {
    FusionGenome genome;
    AcceleratorDesign design;
    std::vector<FusionGroup> groups;
    std::vector<std::int64_t> group_batches;
    std::vector<double> best_by_generation;
    std::string log_csv;  // generation,best_objective,evaluations
    std::size_t evaluations = 0;
};

/// Throws InfeasibleError("fusion", ...) when no genome yields a design.
GaResult ga_search(const OperatorGraph& graph, const DesignSpace& space, Objective objective,
                   const LatencyConstraints& limits, const GaParams& params);

/// Every cut set x every per-group batch, all memories offered to the stage
/// search. Only for small graphs.
GaResult exhaustive_fusion_search(const OperatorGraph& graph, const DesignSpace& space,
                                  Objective objective, const LatencyConstraints& limits,
                                  std::size_t max_nodes = 16);

}  // namespace chipdse
