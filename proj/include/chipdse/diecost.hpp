#pragma once

#include <cstdint>

namespace chipdse {

enum class Bonding { TwoD, TwoPointFiveD };

struct CostParams {
    double wafer_cost = 4000.0;        // $ per 300 mm wafer
    double wafer_diameter_mm = 300.0;
    double defect_density = 0.001;     // defects / mm^2
    double clustering_alpha = 3.0;
    double reticle_limit_mm2 = 858.0;
    double package_base = 5.0;         // $
    double package_per_mm2 = 0.01;     // $ / mm^2 of interposer
    Bonding bonding = Bonding::TwoPointFiveD;
    double bonding_multiplier_2d = 1.0;
    double bonding_multiplier_25d = 1.5;
    double nre_per_chiplet_design = 20e6;
    double nre_per_package_design = 5e6;
    double volume = 1e6;
    double networks_sharing_pool = 200.0;

    void validate() const;
    double bonding_multiplier() const {
        return bonding == Bonding::TwoD ? bonding_multiplier_2d : bonding_multiplier_25d;
    }
};

/// Negative-binomial yield (1 + A*D0/alpha)^-alpha.
double die_yield(double area_mm2, const CostParams& params = CostParams{});

/// Standard dies-per-wafer estimate, floored; at least 0.
std::int64_t gross_dies_per_wafer(double area_mm2, const CostParams& params = CostParams{});

/// Wafer cost split over gross dies, divided by yield. Throws ValidationError
/// past the reticle limit or when no whole die fits.
double die_cost(double area_mm2, const CostParams& params = CostParams{});

double package_cost(double interposer_area_mm2, const CostParams& params = CostParams{});

}  // namespace chipdse
