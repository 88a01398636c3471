#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "chipdse/ga.hpp"

namespace chipdse {

/// A set of distinct chiplet designs that every network draws from.
struct ChipletPool {
    std::vector<ChipletConfig> members;  // kept sorted by design key

    /// Sorts and rejects empty or duplicate pools.
    static ChipletPool from(std::vector<ChipletConfig> members);
    std::string id() const;
    bool contains(const ChipletConfig& c) const;
};

/// One target network with its own deployment limits and batch menu.
struct NetworkTarget {
    OperatorGraph graph;
    LatencyConstraints limits;
    std::vector<std::int64_t> batches = {1};
};

enum class InnerSearch { Ga, Exhaustive };
enum class Aggregation { GeoMean, WorstCase };

struct ScoringParams {
    Objective objective = Objective::EC;
    InnerSearch inner = InnerSearch::Ga;
    GaParams ga;
    Aggregation aggregation = Aggregation::GeoMean;
    std::vector<MemoryModule> memories = default_memory_menu();
    std::vector<int> tps = {1, 2};
    ModelParams model;
    int threads = 1;
};

/// Design space for one network restricted to a pool.
DesignSpace network_space(const ChipletPool& pool, const NetworkTarget& net, const ScoringParams& params);

/// Best search result for one network from the given pool.
GaResult best_network_design(const ChipletPool& pool, const NetworkTarget& net, const ScoringParams& params);

/// Objective of the unfused network on a WS 2x/4x chiplet with HBM3,
/// ignoring latency limits. Divides every network's result in pool scores.
double reference_objective(const NetworkTarget& net, const ScoringParams& params);

struct PoolScore {
    double score = std::numeric_limits<double>::infinity();
    std::vector<double> objectives;  // per network; +inf when infeasible
    std::vector<std::optional<GaResult>> designs;
    std::vector<std::optional<InfeasibleError>> failures;  // why a network has no design
};

/// `references` must hold one reference objective per network.
PoolScore pool_score(const ChipletPool& pool, const std::vector<NetworkTarget>& networks,
                     const std::vector<double>& references, const ScoringParams& params);

enum class PoolMove { Dataflow, PeScale, GlbScale };

/// Mutates one attribute of one member. Moves that leave `menu` or collide
/// with another member are redrawn; after `max_retries` the input comes back.
ChipletPool neighbor_pool(const ChipletPool& pool, const std::vector<ChipletConfig>& menu, std::mt19937_64& rng,
                          std::optional<PoolMove> forced = std::nullopt, int max_retries = 64);

/// Uniformly random pool of `budget` distinct menu entries.
ChipletPool random_pool(const std::vector<ChipletConfig>& menu, std::size_t budget, std::mt19937_64& rng);

/// Metropolis rule; a non-positive temperature accepts only delta <= 0.
bool metropolis_accept(double delta, double temperature, double u);

struct SaParams {
    double initial_temperature = 1.0;
    double cooling = 0.95;
    int iterations_per_level = 5;
    double temperature_floor = 1e-3;
    std::size_t max_evaluations = 0;  // distinct pools scored; 0 = no limit
    std::uint64_t seed = 1;
    GaParams inner_ga{6, 4};
    GaParams final_ga;                // re-polishes the best pool
};

struct SaResult {
    ChipletPool pool;
    double score = std::numeric_limits<double>::infinity();
    std::vector<GaResult> designs;         // per network, from the final polish
    std::vector<double> best_by_step;      // best-ever score after each proposal
    std::string trace_csv;                 // level,temperature,score,accepted
    std::size_t evaluations = 0;
};

SaResult sa_search(const ChipletPool& initial, const std::vector<ChipletConfig>& menu,
                   const std::vector<NetworkTarget>& networks, const ScoringParams& scoring,
                   const SaParams& params);

struct PoolEnumeration {
    ChipletPool pool;
    double score = std::numeric_limits<double>::infinity();
    std::size_t pools_scored = 0;
};

/// Scores every `budget`-subset of the menu; ties keep the first subset in
/// lexicographic menu order.
PoolEnumeration exhaustive_pool_search(const std::vector<ChipletConfig>& menu, std::size_t budget,
                                       const std::vector<NetworkTarget>& networks,
                                       const std::vector<double>& references, const ScoringParams& params);

}  // namespace chipdse
