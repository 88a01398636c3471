#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "chipdse/types.hpp"

namespace chipdse {

inline constexpr std::int64_t kKiB = 1024;
inline constexpr std::int64_t kMiB = 1024 * kKiB;
inline constexpr std::int64_t kGiB = 1024 * kMiB;

inline constexpr std::array<int, 4> kPeScales = {1, 2, 3, 4};
inline constexpr std::array<int, 4> kGlbScales = {1, 4, 9, 16};

/// Calibration knobs of the analytical chiplet model. None of these are
/// measured values; they only need to preserve the orderings the search
/// relies on.
struct PerfParams {
    int base_pe_side = 64;
    std::int64_t base_glb_bytes = 512 * kKiB;
    double frequency_hz = 1e9;
    double e_mac_pj = 0.5;
    double static_power_density = 0.02;  // W/mm^2
    double area_per_pe_mm2 = 0.006;
    double area_per_glb_mib_mm2 = 0.5;
    double interchip_pj_per_bit = 1.3;
    std::int64_t memory_granule_bytes = kGiB;
};

struct ChipletConfig {
    std::string id;
    Dataflow dataflow = Dataflow::WS;
    int pe_scale = 1;
    int glb_scale = 1;
    int pe_rows = 64;
    int pe_cols = 64;
    std::int64_t glb_bytes = 512 * kKiB;
    double frequency_hz = 1e9;
    double e_mac_pj = 0.5;
    double static_power_density = 0.02;
    double area_mm2 = 0.0;

    std::int64_t pe_count() const { return std::int64_t{pe_rows} * pe_cols; }
    double peak_flops() const { return 2.0 * static_cast<double>(pe_count()) * frequency_hz; }

    /// Identity used for deduplication and deterministic ordering.
    std::tuple<int, int, int> design_key() const {
        return {static_cast<int>(dataflow), pe_scale, glb_scale};
    }
    friend bool operator==(const ChipletConfig& a, const ChipletConfig& b) {
        return a.design_key() == b.design_key();
    }
    friend bool operator<(const ChipletConfig& a, const ChipletConfig& b) {
        return a.design_key() < b.design_key();
    }
};

ChipletConfig make_chiplet(Dataflow dataflow, int pe_scale, int glb_scale,
                           const PerfParams& params = PerfParams{});

/// All 48 dataflow x PE-scaling x GLB-scaling combinations, in design-key order.
std::vector<ChipletConfig> full_chiplet_menu(const PerfParams& params = PerfParams{});

struct MemoryModule {
    MemoryKind kind = MemoryKind::HBM3;
    double bandwidth = 819.2e9;          // bytes/s
    double e_bit_pj = 3.9;
    std::int64_t capacity_bytes = 24 * kGiB;
    double cost_per_gb = 15.0;
    double static_power_w = 0.5;
};

MemoryModule default_memory(MemoryKind kind);
/// LPDDR5, DDR5, GDDR7, HBM3 in ascending bandwidth (and price) order.
std::vector<MemoryModule> default_memory_menu();

/// Utilisation factor of a dataflow on an operator kind, in (0, 1].
class AffinityTable {
public:
    AffinityTable();

    double at(OpKind kind, Dataflow df) const;
    void set(OpKind kind, Dataflow df, double value);

private:
    std::array<std::array<double, kNumDataflows>, kNumOpKinds> table_{};
};

double dataflow_affinity(OpKind kind, Dataflow df, const AffinityTable& table = AffinityTable{});

}  // namespace chipdse
