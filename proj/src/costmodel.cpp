#include "chipdse/costmodel.hpp"

#include <cmath>

namespace chipdse {

CostMode parse_cost_mode(std::string_view text) {
    if (text == "re") return CostMode::RecurringOnly;
    if (text == "amortized") return CostMode::Amortized;
    throw ParseError("unknown cost mode '" + std::string(text) + "' (expected re|amortized)");
}

std::string_view to_string(CostMode mode) {
    return mode == CostMode::RecurringOnly ? "re" : "amortized";
}

std::set<ChipletKey> ecosystem_of(const std::vector<const AcceleratorDesign*>& designs) {
    std::set<ChipletKey> out;
    for (const auto* d : designs) {
        for (const auto& s : d->stages) out.insert(s.chiplet.design_key());
    }
    return out;
}

double total_chiplet_area(const AcceleratorDesign& design) {
    double a = 0.0;
    for (const auto& s : design.stages) a += s.chiplet.area_mm2 * s.tp;
    return a;
}

double design_re_cost(const AcceleratorDesign& design, double interposer_area_mm2,
                      const CostParams& params) {
    double c = 0.0;
    for (const auto& s : design.stages) {
        c += die_cost(s.chiplet.area_mm2, params) * s.tp + s.memory_cost;
    }
    return c + package_cost(interposer_area_mm2, params);
}

double amortized_nre(std::size_t ecosystem_size, const CostParams& params) {
    if (!(params.volume >= 1.0)) throw ValidationError("volume must be >= 1");
    const double nre = params.nre_per_chiplet_design * static_cast<double>(ecosystem_size) +
                       params.nre_per_package_design;
    return nre / (params.volume * params.networks_sharing_pool);
}

double amortized_unit_cost(const AcceleratorDesign& design, std::size_t ecosystem_size,
                           double interposer_area_mm2, const CostParams& params) {
    return design_re_cost(design, interposer_area_mm2, params) +
           amortized_nre(ecosystem_size, params);
}

CostBreakdown cost_breakdown(const AcceleratorDesign& design, double interposer_area_mm2,
                             CostMode mode, std::size_t ecosystem_size, const CostParams& params) {
    CostBreakdown b;
    for (const auto& s : design.stages) {
        b.die += die_cost(s.chiplet.area_mm2, params) * s.tp;
        b.memory += s.memory_cost;
    }
    b.package = package_cost(interposer_area_mm2, params);
    if (mode == CostMode::Amortized) b.nre = amortized_nre(ecosystem_size, params);
    return b;
}

double MetricSet::get(Objective obj) const {
    switch (obj) {
        case Objective::Energy:
            return energy;
        case Objective::EC:
            return ec;
        case Objective::EDP:
            return edp;
        case Objective::EDPC:
            return edpc;
    }
    return energy;
}

MetricSet make_metrics(double energy, double delay, double cost) {
    MetricSet m;
    m.energy = energy;
    m.delay = delay;
    m.dollar_cost = cost;
    m.ec = energy * cost;
    m.edp = energy * delay;
    m.edpc = m.edp * cost;
    return m;
}

MetricSet metrics(const AcceleratorDesign& design, const MetricOptions& options,
                  const CostParams& params) {
    if (design.stages.empty() || !(design.period > 0.0)) {
        throw ValidationError("metrics need an evaluated design");
    }
    double energy = 0.0;
    for (const auto& s : design.stages) {
        const double e = stage_energy_at(s, design.period);
        if (!std::isfinite(e)) throw ValidationError("design period is below a stage's T_cmp");
        energy += e;
    }
    const double area = options.interposer_area_mm2 >= 0.0 ? options.interposer_area_mm2
                                                          : total_chiplet_area(design);
    std::size_t eco = options.ecosystem_size;
    if (eco == 0) eco = ecosystem_of({&design}).size();
    const auto b = cost_breakdown(design, area, options.cost_mode, eco, params);
    const double delay = options.delay_mode == DelayMode::Period
                             ? design.period
                             : design.period * options.e2e_factor;
    auto m = make_metrics(energy, delay, b.total());
    for (const auto& s : design.stages) {
        m.ec_stagewise += stage_energy_at(s, design.period) * s.dollar_cost;
    }
    return m;
}

}  // namespace chipdse
