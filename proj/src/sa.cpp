#include "chipdse/sa.hpp"

#include <algorithm>
#include <cmath>

#include "chipdse/format.hpp"
#include "chipdse/parallel.hpp"

namespace chipdse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const ChipletConfig* find_in(const std::vector<ChipletConfig>& menu, Dataflow df, int pe, int glb) {
    for (const auto& c : menu) {
        if (c.dataflow == df && c.pe_scale == pe && c.glb_scale == glb) return &c;
    }
    return nullptr;
}

int step_within(int index, int size, std::mt19937_64& rng) {
    const int dir = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
    const int next = index + dir;
    return next < 0 || next >= size ? index - dir : next;
}

int index_of(const std::array<int, 4>& values, int v) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] == v) return static_cast<int>(i);
    }
    throw ValidationError("chiplet scaling " + std::to_string(v) + " is not on the menu");
}

double aggregate(const std::vector<double>& ratios, Aggregation how) {
    if (how == Aggregation::WorstCase) return *std::max_element(ratios.begin(), ratios.end());
    double log_sum = 0.0;
    for (double r : ratios) {
        if (!std::isfinite(r)) return kInf;
        log_sum += std::log(r);
    }
    return std::exp(log_sum / static_cast<double>(ratios.size()));
}

}  // namespace

ChipletPool ChipletPool::from(std::vector<ChipletConfig> members) {
    if (members.empty()) throw ValidationError("chiplet pool is empty");
    std::sort(members.begin(), members.end());
    if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
        throw ValidationError("chiplet pool has duplicate members");
    }
    return ChipletPool{std::move(members)};
}

std::string ChipletPool::id() const {
    std::string out;
    for (const auto& m : members) {
        if (!out.empty()) out += '+';
        out += m.id;
    }
    return out;
}

bool ChipletPool::contains(const ChipletConfig& c) const {
    return std::find(members.begin(), members.end(), c) != members.end();
}

DesignSpace network_space(const ChipletPool& pool, const NetworkTarget& net, const ScoringParams& params) {
    DesignSpace s;
    s.pool = pool.members;
    s.memories = params.memories;
    s.tps = params.tps;
    s.batches = net.batches;
    s.model = params.model;
    return s;
}

GaResult best_network_design(const ChipletPool& pool, const NetworkTarget& net, const ScoringParams& params) {
    const auto space = network_space(pool, net, params);
    if (params.inner == InnerSearch::Exhaustive) {
        return exhaustive_fusion_search(net.graph, space, params.objective, net.limits);
    }
    return ga_search(net.graph, space, params.objective, net.limits, params.ga);
}

double reference_objective(const NetworkTarget& net, const ScoringParams& params) {
    DesignSpace s;
    s.pool = {make_chiplet(Dataflow::WS, 2, 4, params.model.perf)};
    s.memories = {default_memory(MemoryKind::HBM3)};
    s.tps = params.tps;
    s.batches = {1};
    s.model = params.model;
    const std::size_t n = net.graph.size();
    FusionGenome g{std::vector<bool>(n - 1, true), std::vector<int>(n, 0), std::vector<int>(n, 0)};
    auto legal = legalize_genome(g, net.graph, s);
    if (!legal || *legal != g) {
        throw InfeasibleError("reference", "network '" + net.graph.name() + "' does not fit the reference chiplet");
    }
    const auto fit = evaluate_genome(g, net.graph, s, params.objective, {});
    if (!fit.design || !(fit.objective > 0.0)) {
        throw InfeasibleError("reference", "network '" + net.graph.name() + "' has no reference design");
    }
    return fit.objective;
}

PoolScore pool_score(const ChipletPool& pool, const std::vector<NetworkTarget>& networks,
                     const std::vector<double>& references, const ScoringParams& params) {
    if (networks.empty()) throw ValidationError("pool scoring needs at least one network");
    if (references.size() != networks.size()) throw ValidationError("one reference per network is required");
    PoolScore out;
    out.objectives.assign(networks.size(), kInf);
    out.designs.resize(networks.size());
    out.failures.resize(networks.size());
    parallel_for(networks.size(), params.threads, [&](std::size_t i) {
        try {
            auto r = best_network_design(pool, networks[i], params);
            out.objectives[i] = r.design.objective;
            out.designs[i] = std::move(r);
        } catch (const InfeasibleError& e) {
            out.failures[i] = e;
        }
    });
    std::vector<double> ratios;
    for (std::size_t i = 0; i < networks.size(); ++i) ratios.push_back(out.objectives[i] / references[i]);
    out.score = aggregate(ratios, params.aggregation);
    return out;
}

ChipletPool neighbor_pool(const ChipletPool& pool, const std::vector<ChipletConfig>& menu, std::mt19937_64& rng,
                          std::optional<PoolMove> forced, int max_retries) {
    if (pool.members.empty()) throw ValidationError("chiplet pool is empty");
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.members.size() - 1);
        const std::size_t who = pick(rng);
        const auto& cur = pool.members[who];
        const PoolMove move = forced ? *forced : static_cast<PoolMove>(std::uniform_int_distribution<int>(0, 2)(rng));
        Dataflow df = cur.dataflow;
        int pe = cur.pe_scale;
        int glb = cur.glb_scale;
        switch (move) {
            case PoolMove::Dataflow: {
                const int shift = std::uniform_int_distribution<int>(1, kNumDataflows - 1)(rng);
                df = static_cast<Dataflow>((static_cast<int>(df) + shift) % kNumDataflows);
                break;
            }
            case PoolMove::PeScale:
                pe = kPeScales[static_cast<std::size_t>(step_within(index_of(kPeScales, pe), 4, rng))];
                break;
            case PoolMove::GlbScale:
                glb = kGlbScales[static_cast<std::size_t>(step_within(index_of(kGlbScales, glb), 4, rng))];
                break;
        }
        const ChipletConfig* next = find_in(menu, df, pe, glb);
        if (next == nullptr || pool.contains(*next)) continue;
        auto members = pool.members;
        members[who] = *next;
        return ChipletPool::from(std::move(members));
    }
    return pool;
}

ChipletPool random_pool(const std::vector<ChipletConfig>& menu, std::size_t budget, std::mt19937_64& rng) {
    if (budget == 0 || budget > menu.size()) throw ValidationError("pool budget must lie in [1, menu size]");
    std::vector<std::size_t> idx(menu.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    // Partial Fisher-Yates with an explicit draw so results do not depend on
    // the standard library's shuffle.
    std::vector<ChipletConfig> members;
    for (std::size_t i = 0; i < budget; ++i) {
        const auto j = std::uniform_int_distribution<std::size_t>(i, idx.size() - 1)(rng);
        std::swap(idx[i], idx[j]);
        members.push_back(menu[idx[i]]);
    }
    return ChipletPool::from(std::move(members));
}

bool metropolis_accept(double delta, double temperature, double u) {
    if (delta <= 0.0) return true;
    if (!(temperature > 0.0) || std::isnan(delta)) return false;
    return u < std::exp(-delta / temperature);
}

SaResult sa_search(const ChipletPool& initial, const std::vector<ChipletConfig>& menu,
                   const std::vector<NetworkTarget>& networks, const ScoringParams& scoring,
                   const SaParams& params) {
    if (!(params.initial_temperature > 0.0) || !(params.cooling > 0.0 && params.cooling < 1.0) ||
        params.iterations_per_level < 1 || !(params.temperature_floor > 0.0)) {
        throw ValidationError("invalid annealing schedule");
    }
    for (const auto& m : initial.members) {
        if (std::find(menu.begin(), menu.end(), m) == menu.end()) {
            throw ValidationError("initial pool member " + m.id + " is not on the menu");
        }
    }
    std::vector<double> refs(networks.size());
    parallel_for(networks.size(), scoring.threads,
                 [&](std::size_t i) { refs[i] = reference_objective(networks[i], scoring); });

    ScoringParams inner = scoring;
    inner.ga = params.inner_ga;
    inner.ga.seed = params.seed;
    inner.ga.threads = scoring.ga.threads;

    SaResult result;
    std::map<std::string, double> cache;
    auto score_of = [&](const ChipletPool& p) {
        auto it = cache.find(p.id());
        if (it != cache.end()) return it->second;
        const double s = pool_score(p, networks, refs, inner).score;
        ++result.evaluations;
        cache.emplace(p.id(), s);
        return s;
    };
    auto budget_left = [&] { return params.max_evaluations == 0 || result.evaluations < params.max_evaluations; };

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ChipletPool current = initial;
    double current_score = score_of(current);
    result.pool = current;
    result.score = current_score;
    result.trace_csv = "level,temperature,score,accepted\n";

    double temp = params.initial_temperature;
    for (int level = 0; temp >= params.temperature_floor && budget_left(); ++level, temp *= params.cooling) {
        for (int it = 0; it < params.iterations_per_level && budget_left(); ++it) {
            ChipletPool cand = neighbor_pool(current, menu, rng);
            const double s = score_of(cand);
            // Leaving an infeasible pool is always allowed; entering one never is.
            double delta = s - current_score;
            if (std::isinf(current_score)) delta = std::isinf(s) ? 0.0 : -kInf;
            const bool accepted = metropolis_accept(delta, temp, unit(rng));
            if (accepted) {
                current = std::move(cand);
                current_score = s;
            }
            if (current_score < result.score) {
                result.score = current_score;
                result.pool = current;
            }
            result.best_by_step.push_back(result.score);
            result.trace_csv += std::to_string(level) + "," + num(temp) + "," + num(s) + "," +
                                (accepted ? "1" : "0") + "\n";
        }
    }

    ScoringParams polish = scoring;
    polish.ga = params.final_ga;
    polish.ga.seed = params.seed;
    auto final_score = pool_score(result.pool, networks, refs, polish);
    for (std::size_t i = 0; i < networks.size(); ++i) {
        if (!final_score.designs[i]) {
            const auto& why = final_score.failures[i];
            throw InfeasibleError(why ? why->layer() : "pool",
                                  "no chiplet pool found that serves network '" + networks[i].graph.name() + "'" +
                                      (why ? std::string(": ") + why->what() : std::string()));
        }
        result.designs.push_back(std::move(*final_score.designs[i]));
    }
    result.score = std::min(result.score, final_score.score);
    return result;
}

PoolEnumeration exhaustive_pool_search(const std::vector<ChipletConfig>& menu, std::size_t budget,
                                       const std::vector<NetworkTarget>& networks,
                                       const std::vector<double>& references, const ScoringParams& params) {
    if (budget == 0 || budget > menu.size()) throw ValidationError("pool budget must lie in [1, menu size]");
    PoolEnumeration out;
    std::vector<std::size_t> idx(budget);
    for (std::size_t i = 0; i < budget; ++i) idx[i] = i;
    while (true) {
        std::vector<ChipletConfig> members;
        for (auto i : idx) members.push_back(menu[i]);
        auto pool = ChipletPool::from(std::move(members));
        const double s = pool_score(pool, networks, references, params).score;
        ++out.pools_scored;
        if (s < out.score || out.pools_scored == 1) {
            out.score = s;
            out.pool = std::move(pool);
        }
        // Next combination in lexicographic order.
        std::size_t k = budget;
        while (k > 0 && idx[k - 1] == menu.size() - budget + k - 1) --k;
        if (k == 0) break;
        ++idx[k - 1];
        for (std::size_t j = k; j < budget; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

}  // namespace chipdse
