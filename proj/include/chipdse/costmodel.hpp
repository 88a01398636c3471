#pragma once

#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "chipdse/cht.hpp"
#include "chipdse/diecost.hpp"

namespace chipdse {

enum class CostMode { RecurringOnly, Amortized };
enum class DelayMode { Period, EndToEnd };

CostMode parse_cost_mode(std::string_view text);
std::string_view to_string(CostMode mode);

using ChipletKey = std::tuple<int, int, int>;

/// Unique chiplet designs used by a set of designs.
std::set<ChipletKey> ecosystem_of(const std::vector<const AcceleratorDesign*>& designs);

/// Sum of chiplet areas (tp replicas included); a lower bound on the interposer.
double total_chiplet_area(const AcceleratorDesign& design);

struct CostBreakdown {
    double die = 0.0;
    double memory = 0.0;
    double package = 0.0;
    double nre = 0.0;  // amortized per unit; zero in recurring-only mode

    double recurring() const { return die + memory + package; }
    double total() const { return recurring() + nre; }
};

/// Recurring cost: dies (times tp) plus memory plus package for the given
/// interposer area.
double design_re_cost(const AcceleratorDesign& design, double interposer_area_mm2,
                      const CostParams& params = CostParams{});

/// NRE per unit: (per-design NRE * |ecosystem| + package NRE) / (V * networks).
double amortized_nre(std::size_t ecosystem_size, const CostParams& params = CostParams{});

double amortized_unit_cost(const AcceleratorDesign& design, std::size_t ecosystem_size,
                           double interposer_area_mm2, const CostParams& params = CostParams{});

CostBreakdown cost_breakdown(const AcceleratorDesign& design, double interposer_area_mm2,
                             CostMode mode, std::size_t ecosystem_size,
                             const CostParams& params = CostParams{});

struct MetricSet {
    double energy = 0.0;  // J per sample
    double delay = 0.0;   // s
    double dollar_cost = 0.0;
    double ec = 0.0;
    double edp = 0.0;
    double edpc = 0.0;
    /// sum(E_i * C_i) over stages, the quantity cost-aware searches minimize;
    /// `ec` above is (sum E) * (total cost).
    double ec_stagewise = 0.0;

    double get(Objective obj) const;
};

MetricSet make_metrics(double energy, double delay, double cost);

struct MetricOptions {
    CostMode cost_mode = CostMode::RecurringOnly;
    DelayMode delay_mode = DelayMode::Period;
    double e2e_factor = 1.0;          // delay = factor * T in end-to-end mode
    double interposer_area_mm2 = -1;  // negative: sum of chiplet areas
    std::size_t ecosystem_size = 0;   // zero: the design's own chiplets
};

MetricSet metrics(const AcceleratorDesign& design, const MetricOptions& options = {},
                  const CostParams& params = CostParams{});

}  // namespace chipdse
