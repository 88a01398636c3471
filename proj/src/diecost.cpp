#include "chipdse/diecost.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "chipdse/types.hpp"

namespace chipdse {

void CostParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError(std::string("cost parameter '") + name + "' must be positive");
        }
    };
    positive(wafer_cost, "wafer_cost");
    positive(wafer_diameter_mm, "wafer_diameter");
    positive(reticle_limit_mm2, "reticle_limit");
    positive(package_base, "package_base");
    positive(package_per_mm2, "package_per_mm2");
    positive(bonding_multiplier_2d, "bonding_2d");
    positive(bonding_multiplier_25d, "bonding_2p5d");
    positive(nre_per_chiplet_design, "nre_chiplet");
    positive(nre_per_package_design, "nre_package");
    positive(networks_sharing_pool, "networks");
    if (!(defect_density >= 0.0)) throw ValidationError("defect density must be >= 0");
    if (!(clustering_alpha >= 1.0)) throw ValidationError("clustering alpha must be >= 1");
    if (!(volume >= 1.0)) throw ValidationError("volume must be >= 1");
}

double die_yield(double area_mm2, const CostParams& params) {
    if (!(area_mm2 > 0.0)) throw ValidationError("die area must be positive");
    const double a = params.clustering_alpha;
    return std::pow(1.0 + area_mm2 * params.defect_density / a, -a);
}

std::int64_t gross_dies_per_wafer(double area_mm2, const CostParams& params) {
    if (!(area_mm2 > 0.0)) throw ValidationError("die area must be positive");
    const double d = params.wafer_diameter_mm;
    const double r = d / 2.0;
    const double n = std::numbers::pi * r * r / area_mm2 -
                     std::numbers::pi * d / std::sqrt(2.0 * area_mm2);
    return n <= 0.0 ? 0 : static_cast<std::int64_t>(std::floor(n));
}

double die_cost(double area_mm2, const CostParams& params) {
    if (area_mm2 > params.reticle_limit_mm2) {
        throw ValidationError("die area " + std::to_string(area_mm2) +
                              " mm^2 exceeds the reticle limit");
    }
    const auto dies = gross_dies_per_wafer(area_mm2, params);
    if (dies < 1) throw ValidationError("no whole die fits on the wafer");
    const double k_die = params.wafer_cost / static_cast<double>(dies);
    return k_die / die_yield(area_mm2, params);
}

double package_cost(double interposer_area_mm2, const CostParams& params) {
    if (interposer_area_mm2 < 0.0) throw ValidationError("interposer area must be >= 0");
    // Bonding only scales the interposer-proportional part.
    return params.package_base +
           params.package_per_mm2 * interposer_area_mm2 * params.bonding_multiplier();
}

}  // namespace chipdse
