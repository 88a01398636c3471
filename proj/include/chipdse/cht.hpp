#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "chipdse/perfmodel.hpp"

namespace chipdse {

using StageTable = std::vector<std::vector<StageCandidate>>;

/// Work counters, filled when a pointer is passed to a search.
struct OpCounter {
    std::uint64_t comparisons = 0;
    std::uint64_t evaluations = 0;
    std::uint64_t tuples = 0;
};

/// Admissible pipeline periods. `period_factor` and `e2e_factor` convert the
/// per-sample period into the quantity each cap bounds.
struct LatencyCap {
    double max_period = std::numeric_limits<double>::infinity();
    double period_factor = 1.0;
    double max_e2e = std::numeric_limits<double>::infinity();
    double e2e_factor = 1.0;

    bool admits(double period) const {
        return period * period_factor <= max_period && period * e2e_factor <= max_e2e;
    }
};

/// Stage value as a function of T: intercept + slope * T for T >= activation.
struct AffineSegment {
    double slope = 0.0;
    double intercept = 0.0;
    double activation = 0.0;
    std::size_t ref = 0;

    double at(double t) const { return intercept + slope * t; }
};

/// Segments for one stage's candidates; cost-aware objectives scale both
/// coefficients by the candidate's dollar cost.
std::vector<AffineSegment> make_segments(const std::vector<StageCandidate>& candidates,
                                         Objective objective);

/// Final objective from the summed stage values at period T.
inline double objective_from_sum(double stage_sum, double period, Objective objective) {
    return is_delay_aware(objective) ? stage_sum * period : stage_sum;
}

struct AcceleratorDesign {
    std::vector<StageCandidate> stages;
    std::vector<std::size_t> choice;  // index into each stage's candidate list
    double period = 0.0;              // per-sample pipeline period
    double objective = std::numeric_limits<double>::infinity();
    Objective kind = Objective::Energy;

    bool feasible() const { return !stages.empty() && std::isfinite(objective); }
};

/// Sorted distinct T_cmp values admitted by the cap.
std::vector<double> candidate_latencies(const StageTable& stages, const LatencyCap& cap = {});

inline constexpr std::uint64_t kDefaultNaiveGuard = 10'000'000;

/// Exhaustive enumeration of stage tuples. Throws InfeasibleError when no
/// tuple satisfies the cap and ValidationError past the guard.
AcceleratorDesign naive_search(const StageTable& stages, Objective objective,
                               const LatencyCap& cap = {}, OpCounter* counter = nullptr,
                               std::uint64_t guard = kDefaultNaiveGuard);

/// Per-T independent linear scans over every stage.
AcceleratorDesign iso_latency_search(const StageTable& stages, Objective objective,
                                     const LatencyCap& cap = {}, OpCounter* counter = nullptr);

/// Lower envelopes of a stage's segments, one version per distinct
/// activation threshold. Versions share structure (persistent treap), so
/// building costs O(M log M) time and space.
class ThresholdHulls {
public:
    struct Hit {
        std::size_t ref = 0;
        double value = 0.0;
    };

    ThresholdHulls() = default;
    explicit ThresholdHulls(std::vector<AffineSegment> segments, OpCounter* counter = nullptr);

    const std::vector<double>& thresholds() const { return thresholds_; }
    /// Number of segments kept in the hull for threshold i.
    std::size_t hull_size(std::size_t i) const;
    /// Refs of hull i in decreasing slope order.
    std::vector<std::size_t> hull_refs(std::size_t i) const;

    /// Minimum stage value at T over segments with activation <= T.
    std::optional<Hit> query(double t, OpCounter* counter = nullptr) const;

private:
    struct Node {
        long double k = 0;  // negated slope, ascending in-order
        long double m = 0;  // negated intercept
        long double p = 0;  // crossover with successor
        std::uint64_t prio = 0;
        std::size_t ref = 0;
        std::size_t seg = 0;
        int left = -1;
        int right = -1;
        int count = 1;
    };

    int clone(int n);
    void pull(int n);
    int merge(int a, int b);
    void split_by_key(int n, long double k, int& l, int& r);
    int pop_first(int n);
    int pop_last(int n);
    int set_last_p(int n, long double p);
    int first_of(int n) const;
    int last_of(int n) const;
    /// Last node and its in-order predecessor (-1 when absent).
    void last_two(int n, int& last, int& prev) const;
    int insert(int root, std::size_t seg);
    long double cross(int x, int y);
    void collect(int n, std::vector<std::size_t>& out) const;

    std::vector<AffineSegment> segs_;
    std::vector<Node> nodes_;
    std::vector<double> thresholds_;
    std::vector<int> roots_;
    OpCounter* build_counter_ = nullptr;
};

ThresholdHulls build_threshold_hulls(const std::vector<AffineSegment>& segments,
                                     OpCounter* counter = nullptr);

std::optional<ThresholdHulls::Hit> query_stage_min(const ThresholdHulls& hulls, double t,
                                                   OpCounter* counter = nullptr);

/// Iso-latency search answering each (stage, T) query from the hulls.
AcceleratorDesign cht_search(const StageTable& stages, Objective objective,
                             const LatencyCap& cap = {}, OpCounter* counter = nullptr);

enum class StageSolver { Naive, Iso, Cht };
AcceleratorDesign solve_stages(StageSolver solver, const StageTable& stages, Objective objective,
                               const LatencyCap& cap = {}, OpCounter* counter = nullptr);

}  // namespace chipdse
