#include "chipdse/hardware.hpp"

#include <stdexcept>
#include <string>

namespace chipdse {

ChipletConfig make_chiplet(Dataflow dataflow, int pe_scale, int glb_scale, const PerfParams& params) {
    bool pe_ok = false;
    for (int s : kPeScales) pe_ok = pe_ok || s == pe_scale;
    bool glb_ok = false;
    for (int s : kGlbScales) glb_ok = glb_ok || s == glb_scale;
    if (!pe_ok) throw ValidationError("PE scaling must be one of {1,2,3,4}");
    if (!glb_ok) throw ValidationError("GLB scaling must be one of {1,4,9,16}");

    ChipletConfig c;
    c.dataflow = dataflow;
    c.pe_scale = pe_scale;
    c.glb_scale = glb_scale;
    c.pe_rows = params.base_pe_side * pe_scale;
    c.pe_cols = params.base_pe_side * pe_scale;
    c.glb_bytes = params.base_glb_bytes * glb_scale;
    c.frequency_hz = params.frequency_hz;
    c.e_mac_pj = params.e_mac_pj;
    c.static_power_density = params.static_power_density;
    const double glb_mib = static_cast<double>(c.glb_bytes) / static_cast<double>(kMiB);
    c.area_mm2 = params.area_per_pe_mm2 * static_cast<double>(c.pe_count()) +
                 params.area_per_glb_mib_mm2 * glb_mib;
    c.id = std::string(to_string(dataflow)) + "-p" + std::to_string(pe_scale) + "-g" +
           std::to_string(glb_scale);
    return c;
}

std::vector<ChipletConfig> full_chiplet_menu(const PerfParams& params) {
    std::vector<ChipletConfig> menu;
    for (int df = 0; df < kNumDataflows; ++df) {
        for (int pe : kPeScales) {
            for (int glb : kGlbScales) {
                menu.push_back(make_chiplet(static_cast<Dataflow>(df), pe, glb, params));
            }
        }
    }
    return menu;
}

MemoryModule default_memory(MemoryKind kind) {
    MemoryModule m;
    m.kind = kind;
    switch (kind) {
        case MemoryKind::LPDDR5:
            m.bandwidth = 51.2e9;
            m.e_bit_pj = 4.0;
            m.capacity_bytes = 16 * kGiB;
            m.cost_per_gb = 2.5;
            m.static_power_w = 0.05;
            break;
        case MemoryKind::DDR5:
            m.bandwidth = 64.0e9;
            m.e_bit_pj = 6.0;
            m.capacity_bytes = 32 * kGiB;
            m.cost_per_gb = 3.0;
            m.static_power_w = 0.15;
            break;
        case MemoryKind::GDDR7:
            m.bandwidth = 192.0e9;
            m.e_bit_pj = 5.0;
            m.capacity_bytes = 16 * kGiB;
            m.cost_per_gb = 6.0;
            m.static_power_w = 0.3;
            break;
        case MemoryKind::HBM3:
            m.bandwidth = 819.2e9;
            m.e_bit_pj = 3.5;
            m.capacity_bytes = 24 * kGiB;
            m.cost_per_gb = 15.0;
            m.static_power_w = 0.5;
            break;
    }
    return m;
}

std::vector<MemoryModule> default_memory_menu() {
    return {default_memory(MemoryKind::LPDDR5), default_memory(MemoryKind::DDR5),
            default_memory(MemoryKind::GDDR7), default_memory(MemoryKind::HBM3)};
}

AffinityTable::AffinityTable() {
    using enum Dataflow;
    // Best pairings are 1.0; every mismatched pair sits in [0.5, 0.85].
    auto row = [this](OpKind k, double rs, double os, double ws) {
        set(k, RS, rs);
        set(k, OS, os);
        set(k, WS, ws);
    };
    row(OpKind::Conv, 1.0, 0.7, 0.8);
    row(OpKind::DepthwiseConv, 0.85, 0.7, 0.5);
    row(OpKind::MatMul, 0.75, 0.8, 1.0);
    row(OpKind::AttentionScore, 0.6, 0.85, 0.7);
    row(OpKind::AttentionContext, 0.6, 0.85, 0.8);
    row(OpKind::Elementwise, 0.6, 1.0, 0.5);
    row(OpKind::Normalization, 0.6, 0.85, 0.5);
}

double AffinityTable::at(OpKind kind, Dataflow df) const {
    return table_.at(static_cast<std::size_t>(kind)).at(static_cast<std::size_t>(df));
}

void AffinityTable::set(OpKind kind, Dataflow df, double value) {
    if (!(value > 0.0 && value <= 1.0)) {
        throw ValidationError("affinity must lie in (0, 1]");
    }
    table_.at(static_cast<std::size_t>(kind)).at(static_cast<std::size_t>(df)) = value;
}

double dataflow_affinity(OpKind kind, Dataflow df, const AffinityTable& table) {
    return table.at(kind, df);
}

}  // namespace chipdse
