#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "chipdse/diecost.hpp"
#include "chipdse/hardware.hpp"
#include "chipdse/workload.hpp"

namespace chipdse {

/// Everything the analytical model needs besides the workload itself.
struct ModelParams {
    PerfParams perf;
    AffinityTable affinity;
    CostParams cost;
};

/// Contiguous run of operators [begin, end) in topological order.
struct FusionGroup {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    friend bool operator==(const FusionGroup&, const FusionGroup&) = default;
};

/// Cuts are positions i meaning "boundary between node i and i+1".
std::vector<FusionGroup> groups_from_cuts(std::size_t num_nodes, const std::vector<bool>& cuts);

/// Chiplet-independent per-sample sums over a fusion group.
struct GroupProfile {
    FusionGroup range;
    std::array<double, kNumOpKinds> flops_by_kind{};  // per sample, repeat applied
    double flops = 0.0;
    double sensitive_weight_bytes = 0.0;  // fetched once per batch
    double agnostic_weight_bytes = 0.0;   // fetched per sample
    double io_bytes = 0.0;                // external inputs + outputs per sample
    double output_bytes = 0.0;            // external outputs per sample
    std::int64_t resident_weight_bytes = 0;
    std::int64_t resident_cache_bytes = 0;     // per-sample KV cache, held once per batch slot
    std::int64_t max_tile_bytes = 0;      // largest fused intermediate per sample
};

GroupProfile profile_group(const OperatorGraph& graph, FusionGroup group);

struct StageCandidate {
    std::size_t group_index = 0;
    FusionGroup range;
    ChipletConfig chiplet;
    MemoryModule memory;
    int tp = 1;
    std::int64_t batch = 1;
    // Per-sample quantities; a batch takes batch * t_cmp seconds.
    double t_cmp = 0.0;
    double e_dyn = 0.0;
    double p_static = 0.0;
    double dollar_cost = 0.0;
    double compute_time = 0.0;
    double memory_time = 0.0;
    double traffic_bytes = 0.0;
    double interchip_bytes = 0.0;
    double flops = 0.0;
    double die_cost = 0.0;     // one chiplet die
    double memory_cost = 0.0;

    std::tuple<int, int, int, int, int, std::int64_t> key() const {
        return {static_cast<int>(chiplet.dataflow), chiplet.pe_scale, chiplet.glb_scale,
                static_cast<int>(memory.kind), tp, batch};
    }
};

enum class Infeasibility { None, Glb, Capacity, Reticle };

/// Checks the double-buffering and capacity gates without evaluating.
Infeasibility candidate_gate(const GroupProfile& profile, const ChipletConfig& chiplet,
                             const MemoryModule& memory, const ModelParams& params);

/// Returns nullopt when a gate rejects the point.
std::optional<StageCandidate> candidate_eval(const GroupProfile& profile,
                                             const ChipletConfig& chiplet,
                                             const MemoryModule& memory, std::int64_t batch,
                                             int tp, const ModelParams& params = ModelParams{});

std::optional<StageCandidate> candidate_eval(const OperatorGraph& graph, FusionGroup group,
                                             const ChipletConfig& chiplet,
                                             const MemoryModule& memory, std::int64_t batch,
                                             int tp, const ModelParams& params = ModelParams{});

/// E_dyn + P_static * T for T >= T_cmp, +infinity below.
double stage_energy_at(const StageCandidate& candidate, double period);

struct CandidateMenus {
    std::vector<MemoryModule> memories = default_memory_menu();
    std::vector<int> tps = {1, 2};
    std::vector<std::int64_t> batches = {1};
};

/// Feasible points of pool x memories x tp x batches, sorted by key().
std::vector<StageCandidate> enumerate_candidates(const GroupProfile& profile,
                                                 const std::vector<ChipletConfig>& pool,
                                                 const CandidateMenus& menus,
                                                 const ModelParams& params = ModelParams{});

/// Memory dollar cost for holding the given resident bytes.
double memory_dollar_cost(std::int64_t resident_bytes, const MemoryModule& memory,
                          const PerfParams& perf);

}  // namespace chipdse
