#include "chipdse/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chipdse {

std::vector<FusionGroup> groups_from_cuts(std::size_t num_nodes, const std::vector<bool>& cuts) {
    if (num_nodes == 0) return {};
    if (cuts.size() + 1 != num_nodes) {
        throw ValidationError("cut vector must have one entry per adjacent node pair");
    }
    std::vector<FusionGroup> out;
    std::size_t begin = 0;
    for (std::size_t i = 0; i + 1 < num_nodes; ++i) {
        if (cuts[i]) {
            out.push_back({begin, i + 1});
            begin = i + 1;
        }
    }
    out.push_back({begin, num_nodes});
    return out;
}

GroupProfile profile_group(const OperatorGraph& graph, FusionGroup group) {
    if (group.begin >= group.end || group.end > graph.size()) {
        throw ValidationError("fusion group out of range");
    }
    GroupProfile p;
    p.range = group;
    auto inside = [&](std::size_t i) { return i >= group.begin && i < group.end; };

    // Per-node bytes that stay on chip, split by direction.
    std::vector<std::int64_t> fused_in(graph.size(), 0), fused_out(graph.size(), 0);
    for (const auto& e : graph.edges()) {
        if (inside(e.src) && inside(e.dst)) {
            fused_out[e.src] += e.bytes;
            fused_in[e.dst] += e.bytes;
            p.max_tile_bytes = std::max(p.max_tile_bytes, e.bytes);
        }
    }

    for (std::size_t i = group.begin; i < group.end; ++i) {
        const auto& op = graph.node(i);
        const auto st = operator_footprint(op, 1);
        const double r = static_cast<double>(op.repeat);
        const double f = r * static_cast<double>(st.flops);
        p.flops_by_kind[static_cast<std::size_t>(op.kind)] += f;
        p.flops += f;
        const double w = r * static_cast<double>(st.weight_bytes);
        if (op.batch_class == BatchClass::Sensitive) {
            p.sensitive_weight_bytes += w;
        } else {
            p.agnostic_weight_bytes += w;
        }
        const double in = static_cast<double>(std::max<std::int64_t>(0, st.input_bytes - fused_in[i]));
        const double out =
            static_cast<double>(std::max<std::int64_t>(0, st.output_bytes - fused_out[i]));
        p.io_bytes += r * (in + out);
        p.output_bytes += r * out;
        std::int64_t resident = 0;
        if (__builtin_mul_overflow(op.repeat, st.weight_bytes, &resident) ||
            __builtin_add_overflow(p.resident_weight_bytes, resident, &p.resident_weight_bytes)) {
            throw ValidationError("resident weights overflow");
        }
        std::int64_t cache = 0;
        if (__builtin_mul_overflow(op.repeat, st.cache_bytes, &cache) ||
            __builtin_add_overflow(p.resident_cache_bytes, cache, &p.resident_cache_bytes)) {
            throw ValidationError("resident cache overflow");
        }
    }
    return p;
}

Infeasibility candidate_gate(const GroupProfile& profile, const ChipletConfig& chiplet,
                             const MemoryModule& memory, const ModelParams& params) {
    if (chiplet.area_mm2 > params.cost.reticle_limit_mm2) return Infeasibility::Reticle;
    if (2 * profile.max_tile_bytes > chiplet.glb_bytes) return Infeasibility::Glb;
    if (profile.resident_weight_bytes + profile.resident_cache_bytes > memory.capacity_bytes) {
        return Infeasibility::Capacity;
    }
    return Infeasibility::None;
}

double memory_dollar_cost(std::int64_t resident_bytes, const MemoryModule& memory,
                          const PerfParams& perf) {
    const std::int64_t g = perf.memory_granule_bytes;
    const std::int64_t granules = std::max<std::int64_t>(1, (resident_bytes + g - 1) / g);
    return static_cast<double>(granules) * static_cast<double>(g) / static_cast<double>(kGiB) *
           memory.cost_per_gb;
}

std::optional<StageCandidate> candidate_eval(const GroupProfile& profile,
                                             const ChipletConfig& chiplet,
                                             const MemoryModule& memory, std::int64_t batch,
                                             int tp, const ModelParams& params) {
    if (batch < 1) throw ValidationError("batch must be >= 1");
    if (tp != 1 && tp != 2) throw ValidationError("tensor parallelism must be 1 or 2");
    if (candidate_gate(profile, chiplet, memory, params) != Infeasibility::None) {
        return std::nullopt;
    }

    StageCandidate c;
    c.range = profile.range;
    c.chiplet = chiplet;
    c.memory = memory;
    c.tp = tp;
    c.batch = batch;
    c.flops = profile.flops;

    const double tpd = static_cast<double>(tp);
    for (int k = 0; k < kNumOpKinds; ++k) {
        const double f = profile.flops_by_kind[static_cast<std::size_t>(k)];
        if (f == 0.0) continue;
        const double aff = params.affinity.at(static_cast<OpKind>(k), chiplet.dataflow);
        c.compute_time += f / (chiplet.peak_flops() * aff * tpd);
    }
    c.traffic_bytes = profile.sensitive_weight_bytes / static_cast<double>(batch) +
                      profile.agnostic_weight_bytes + profile.io_bytes;
    c.memory_time = c.traffic_bytes / memory.bandwidth;
    c.t_cmp = std::max(c.compute_time, c.memory_time);
    if (!(c.t_cmp > 0.0)) {
        throw ValidationError("stage has neither compute nor traffic");
    }

    c.interchip_bytes = profile.output_bytes + (tpd - 1.0) / tpd * profile.output_bytes;
    constexpr double pj = 1e-12;
    c.e_dyn = pj * (c.flops * chiplet.e_mac_pj + 8.0 * c.traffic_bytes * memory.e_bit_pj +
                    8.0 * c.interchip_bytes * params.perf.interchip_pj_per_bit);
    c.p_static = chiplet.static_power_density * chiplet.area_mm2 * tpd + memory.static_power_w;
    c.die_cost = die_cost(chiplet.area_mm2, params.cost);
    // Every sample in a batch keeps its own KV cache.
    std::int64_t resident = 0;
    if (__builtin_mul_overflow(batch, profile.resident_cache_bytes, &resident) ||
        __builtin_add_overflow(resident, profile.resident_weight_bytes, &resident)) {
        throw ValidationError("resident bytes overflow at this batch");
    }
    c.memory_cost = memory_dollar_cost(resident, memory, params.perf);
    c.dollar_cost = tpd * c.die_cost + c.memory_cost;
    return c;
}

std::optional<StageCandidate> candidate_eval(const OperatorGraph& graph, FusionGroup group,
                                             const ChipletConfig& chiplet,
                                             const MemoryModule& memory, std::int64_t batch,
                                             int tp, const ModelParams& params) {
    return candidate_eval(profile_group(graph, group), chiplet, memory, batch, tp, params);
}

double stage_energy_at(const StageCandidate& candidate, double period) {
    if (!(period > 0.0)) throw ValidationError("period must be positive");
    if (period < candidate.t_cmp) return std::numeric_limits<double>::infinity();
    return candidate.e_dyn + candidate.p_static * period;
}

std::vector<StageCandidate> enumerate_candidates(const GroupProfile& profile,
                                                 const std::vector<ChipletConfig>& pool,
                                                 const CandidateMenus& menus,
                                                 const ModelParams& params) {
    if (pool.empty()) throw ValidationError("chiplet pool is empty");
    std::vector<StageCandidate> out;
    for (const auto& chiplet : pool) {
        for (const auto& memory : menus.memories) {
            for (int tp : menus.tps) {
                for (auto b : menus.batches) {
                    if (auto c = candidate_eval(profile, chiplet, memory, b, tp, params)) {
                        out.push_back(std::move(*c));
                    }
                }
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const StageCandidate& a, const StageCandidate& b) { return a.key() < b.key(); });
    return out;
}

}  // namespace chipdse
