#include "chipdse/ga.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "chipdse/format.hpp"
#include "chipdse/parallel.hpp"

namespace chipdse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kDuplicateRetries = 8;

std::vector<std::int64_t> group_batches_of(const FusionGenome& g, const std::vector<FusionGroup>& groups,
                                           const DesignSpace& space) {
    std::vector<std::int64_t> out;
    for (const auto& grp : groups) {
        out.push_back(space.batches.at(static_cast<std::size_t>(g.batch.at(grp.begin))));
    }
    return out;
}

void validate_space(const OperatorGraph& graph, const DesignSpace& space) {
    if (graph.size() == 0) throw ValidationError("graph has no operators");
    if (space.pool.empty()) throw ValidationError("chiplet pool is empty");
    if (space.memories.empty()) throw ValidationError("memory menu is empty");
    if (space.tps.empty()) throw ValidationError("tensor-parallel menu is empty");
    if (space.batches.empty()) throw ValidationError("batch menu is empty");
}

// Memory indices ordered by price, then bandwidth.
std::vector<int> memories_by_price(const DesignSpace& space) {
    std::vector<int> idx(space.memories.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        const auto& ma = space.memories[static_cast<std::size_t>(a)];
        const auto& mb = space.memories[static_cast<std::size_t>(b)];
        return std::tie(ma.cost_per_gb, ma.bandwidth) < std::tie(mb.cost_per_gb, mb.bandwidth);
    });
    return idx;
}

}  // namespace

double reaccumulation_periods(const std::vector<std::int64_t>& b) {
    double extra = 0.0;
    for (std::size_t i = 1; i < b.size(); ++i) {
        const auto hi = std::max(b[i - 1], b[i]);
        const auto lo = std::min(b[i - 1], b[i]);
        if (hi == lo) continue;
        int doublings = 0;
        for (std::int64_t x = lo; x < hi; x *= 2) ++doublings;
        extra += static_cast<double>(doublings) * static_cast<double>(hi);
    }
    return extra;
}

double e2e_factor(const std::vector<std::int64_t>& b) {
    double s = 0.0;
    for (auto x : b) s += static_cast<double>(x);
    return s + reaccumulation_periods(b);
}

double period_factor(const std::vector<std::int64_t>& b) {
    std::int64_t m = 1;
    for (auto x : b) m = std::max(m, x);
    return static_cast<double>(m);
}

LatencyCap latency_cap(const std::vector<std::int64_t>& group_batches, const LatencyConstraints& limits) {
    LatencyCap cap;
    cap.max_period = limits.max_period;
    cap.period_factor = period_factor(group_batches);
    cap.max_e2e = limits.max_e2e;
    cap.e2e_factor = e2e_factor(group_batches);
    return cap;
}

std::vector<FusionGroup> genome_groups(const FusionGenome& genome) {
    return groups_from_cuts(genome.memory.size(), genome.cuts);
}

bool group_feasible(const GroupProfile& profile, const DesignSpace& space, int memory_index) {
    const auto& mem = space.memories.at(static_cast<std::size_t>(memory_index));
    return std::any_of(space.pool.begin(), space.pool.end(), [&](const ChipletConfig& c) {
        return candidate_gate(profile, c, mem, space.model) == Infeasibility::None;
    });
}

std::optional<FusionGenome> legalize_genome(FusionGenome genome, const OperatorGraph& graph,
                                            const DesignSpace& space) {
    const std::size_t n = graph.size();
    if (genome.memory.size() != n || genome.batch.size() != n || genome.cuts.size() + 1 != n) {
        throw ValidationError("genome does not match the graph size");
    }
    const auto by_price = memories_by_price(space);
    for (const auto& grp : genome_groups(genome)) {
        std::size_t pos = grp.begin;
        while (pos < grp.end) {
            int mem = genome.memory[pos];
            if (!group_feasible(profile_group(graph, {pos, pos + 1}), space, mem)) {
                auto it = std::find_if(by_price.begin(), by_price.end(), [&](int m) {
                    return group_feasible(profile_group(graph, {pos, pos + 1}), space, m);
                });
                if (it == by_price.end()) return std::nullopt;
                mem = *it;
                genome.memory[pos] = mem;
            }
            std::size_t end = pos + 1;
            while (end < grp.end && group_feasible(profile_group(graph, {pos, end + 1}), space, mem)) ++end;
            if (end < grp.end) genome.cuts[end - 1] = true;
            for (std::size_t i = pos + 1; i < end; ++i) {
                genome.memory[i] = genome.memory[pos];
                genome.batch[i] = genome.batch[pos];
            }
            pos = end;
        }
    }
    return genome;
}

int roofline_memory(const GroupProfile& profile, const DesignSpace& space, std::int64_t batch) {
    // Fastest memory and the chiplet that computes this group quickest.
    int fastest = 0;
    for (std::size_t i = 1; i < space.memories.size(); ++i) {
        if (space.memories[i].bandwidth > space.memories[static_cast<std::size_t>(fastest)].bandwidth) {
            fastest = static_cast<int>(i);
        }
    }
    std::optional<StageCandidate> ref;
    for (const auto& chip : space.pool) {
        auto c = candidate_eval(profile, chip, space.memories[static_cast<std::size_t>(fastest)], batch, 1,
                                space.model);
        if (c && (!ref || c->compute_time < ref->compute_time)) ref = c;
    }
    if (!ref) return fastest;
    for (int m : memories_by_price(space)) {
        auto c = candidate_eval(profile, ref->chiplet, space.memories[static_cast<std::size_t>(m)], batch, 1,
                                space.model);
        if (c && c->t_cmp == ref->t_cmp) return m;
    }
    return fastest;
}

namespace {

FusionGenome blank_genome(std::size_t n, bool cut_all) {
    FusionGenome g;
    g.cuts.assign(n > 0 ? n - 1 : 0, cut_all);
    g.memory.assign(n, 0);
    g.batch.assign(n, 0);
    return g;
}

void assign_roofline_memories(FusionGenome& g, const OperatorGraph& graph, const DesignSpace& space) {
    for (const auto& grp : genome_groups(g)) {
        const auto b = space.batches.at(static_cast<std::size_t>(g.batch[grp.begin]));
        const int m = roofline_memory(profile_group(graph, grp), space, b);
        for (std::size_t i = grp.begin; i < grp.end; ++i) g.memory[i] = m;
    }
}

std::optional<FusionGenome> seeded(FusionGenome g, const OperatorGraph& graph, const DesignSpace& space) {
    // Legalize first so the memory rule sees final groups, then again in
    // case the chosen memory cannot hold a group.
    auto legal = legalize_genome(std::move(g), graph, space);
    if (!legal) return std::nullopt;
    assign_roofline_memories(*legal, graph, space);
    return legalize_genome(std::move(*legal), graph, space);
}

}  // namespace

std::vector<FusionGenome> seed_population(const OperatorGraph& graph, const DesignSpace& space,
                                          const GaParams& params) {
    validate_space(graph, space);
    if (params.population < 3) throw ValidationError("population must be at least 3");
    const std::size_t n = graph.size();
    std::vector<FusionGenome> pop;
    auto add = [&](std::optional<FusionGenome> g) {
        if (!g) {
            throw InfeasibleError("fusion", "an operator cannot be mapped on any pool chiplet");
        }
        pop.push_back(std::move(*g));
    };

    add(seeded(blank_genome(n, true), graph, space));   // no fusion
    add(seeded(blank_genome(n, false), graph, space));  // maximal legal fusion

    // Early-layer fusion: the longest legal prefix, everything after unfused.
    auto early = blank_genome(n, true);
    {
        auto probe = legalize_genome(blank_genome(n, false), graph, space);
        std::size_t prefix = 1;
        while (prefix < n && !probe->cuts[prefix - 1]) ++prefix;
        for (std::size_t i = 0; i + 1 < prefix; ++i) early.cuts[i] = false;
    }
    add(seeded(early, graph, space));

    std::mt19937_64 rng(params.seed);
    std::uniform_int_distribution<int> mem_d(0, static_cast<int>(space.memories.size()) - 1);
    std::uniform_int_distribution<int> batch_d(0, static_cast<int>(space.batches.size()) - 1);
    std::bernoulli_distribution coin(0.5);
    while (pop.size() < static_cast<std::size_t>(params.population)) {
        FusionGenome g = blank_genome(n, false);
        for (std::size_t i = 0; i + 1 < n; ++i) g.cuts[i] = coin(rng);
        for (std::size_t i = 0; i < n; ++i) {
            g.memory[i] = mem_d(rng);
            g.batch[i] = batch_d(rng);
        }
        add(legalize_genome(std::move(g), graph, space));
    }
    return pop;
}

StageTable genome_stage_table(const FusionGenome& genome, const OperatorGraph& graph,
                              const DesignSpace& space) {
    StageTable table;
    for (const auto& grp : genome_groups(genome)) {
        CandidateMenus menus;
        menus.memories = {space.memories.at(static_cast<std::size_t>(genome.memory[grp.begin]))};
        menus.tps = space.tps;
        menus.batches = {space.batches.at(static_cast<std::size_t>(genome.batch[grp.begin]))};
        table.push_back(enumerate_candidates(profile_group(graph, grp), space.pool, menus, space.model));
    }
    return table;
}

GenomeFitness evaluate_genome(const FusionGenome& genome, const OperatorGraph& graph,
                              const DesignSpace& space, Objective objective,
                              const LatencyConstraints& limits) {
    const auto groups = genome_groups(genome);
    const auto table = genome_stage_table(genome, graph, space);
    for (const auto& st : table) {
        if (st.empty()) throw ValidationError("fitness called on an illegal genome");
    }
    GenomeFitness f;
    try {
        auto d = cht_search(table, objective, latency_cap(group_batches_of(genome, groups, space), limits));
        f.objective = d.objective;
        f.design = std::move(d);
    } catch (const InfeasibleError&) {
    }
    return f;
}

GaResult ga_search(const OperatorGraph& graph, const DesignSpace& space, Objective objective,
                   const LatencyConstraints& limits, const GaParams& params) {
    if (params.generations < 1 || params.tournament < 1) {
        throw ValidationError("GA generations and tournament size must be positive");
    }
    if (!(params.mutation_rate >= 0.0 && params.mutation_rate <= 1.0) ||
        !(params.crossover_rate >= 0.0 && params.crossover_rate <= 1.0)) {
        throw ValidationError("GA rates must lie in [0, 1]");
    }
    auto pop = seed_population(graph, space, params);
    const std::size_t n = graph.size();
    std::mt19937_64 rng(params.seed ^ 0x5deece66dULL);

    std::map<FusionGenome, GenomeFitness> cache;
    GaResult result;
    auto evaluate_all = [&](const std::vector<FusionGenome>& genomes) {
        std::vector<const FusionGenome*> todo;
        for (const auto& g : genomes) {
            if (!cache.count(g) &&
                std::none_of(todo.begin(), todo.end(), [&](const FusionGenome* t) { return *t == g; })) {
                todo.push_back(&g);
            }
        }
        std::vector<GenomeFitness> out(todo.size());
        parallel_for(todo.size(), params.threads, [&](std::size_t i) {
            out[i] = evaluate_genome(*todo[i], graph, space, objective, limits);
        });
        for (std::size_t i = 0; i < todo.size(); ++i) cache.emplace(*todo[i], std::move(out[i]));
        result.evaluations += todo.size();
        std::vector<double> fit;
        for (const auto& g : genomes) fit.push_back(cache.at(g).objective);
        return fit;
    };

    FusionGenome best_genome = pop.front();
    double best = kInf;
    auto fitness = evaluate_all(pop);
    auto note_generation = [&](int gen) {
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (fitness[i] < best) {
                best = fitness[i];
                best_genome = pop[i];
            }
        }
        result.best_by_generation.push_back(best);
        result.log_csv += std::to_string(gen) + "," + num(best) + "," + std::to_string(result.evaluations) + "\n";
    };
    result.log_csv = "generation,best_objective,evaluations\n";
    note_generation(0);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto pick = [&]() -> std::size_t {
        std::uniform_int_distribution<std::size_t> d(0, pop.size() - 1);
        std::size_t w = d(rng);
        for (int t = 1; t < params.tournament; ++t) {
            const std::size_t c = d(rng);
            if (fitness[c] < fitness[w] || (fitness[c] == fitness[w] && c < w)) w = c;
        }
        return w;
    };
    // Mutation picks among the moves that can change something: toggle a
    // cut, or redraw one group's memory or batch to a different value.
    enum class Move { Cut, Memory, Batch };
    std::vector<Move> moves;
    if (n > 1) moves.push_back(Move::Cut);
    if (space.memories.size() > 1) moves.push_back(Move::Memory);
    if (space.batches.size() > 1) moves.push_back(Move::Batch);
    auto redraw = [&](int current, std::size_t size) {
        std::uniform_int_distribution<int> d(0, static_cast<int>(size) - 2);
        const int v = d(rng);
        return v >= current ? v + 1 : v;
    };
    auto mutate = [&](FusionGenome& g) {
        if (moves.empty()) return;
        std::uniform_int_distribution<std::size_t> md(0, moves.size() - 1);
        const Move move = moves[md(rng)];
        if (move == Move::Cut) {
            std::uniform_int_distribution<std::size_t> d(0, n - 2);
            const auto i = d(rng);
            g.cuts[i] = !g.cuts[i];
            return;
        }
        const auto groups = genome_groups(g);
        std::uniform_int_distribution<std::size_t> gd(0, groups.size() - 1);
        const auto& grp = groups[gd(rng)];
        auto& genes = move == Move::Memory ? g.memory : g.batch;
        const auto size = move == Move::Memory ? space.memories.size() : space.batches.size();
        const int v = redraw(genes[grp.begin], size);
        for (std::size_t i = grp.begin; i < grp.end; ++i) genes[i] = v;
    };

    for (int gen = 1; gen < params.generations; ++gen) {
        std::vector<FusionGenome> next = {best_genome};
        while (next.size() < pop.size()) {
            FusionGenome a = pop[pick()];
            FusionGenome b = pop[pick()];
            if (n > 1 && unit(rng) < params.crossover_rate) {
                std::uniform_int_distribution<std::size_t> d(1, n - 1);
                const std::size_t c = d(rng);
                FusionGenome x = a, y = b;
                for (std::size_t i = c; i < n; ++i) {
                    std::swap(x.memory[i], y.memory[i]);
                    std::swap(x.batch[i], y.batch[i]);
                }
                for (std::size_t i = c - 1; i + 1 < n; ++i) {
                    const bool t = x.cuts[i];
                    x.cuts[i] = y.cuts[i];
                    y.cuts[i] = t;
                }
                a = std::move(x);
                b = std::move(y);
            }
            for (auto* child : {&a, &b}) {
                if (next.size() >= pop.size()) break;
                if (unit(rng) < params.mutation_rate) mutate(*child);
                auto legal = legalize_genome(*child, graph, space);
                if (!legal) throw InfeasibleError("fusion", "an operator cannot be mapped on any pool chiplet");
                // Children that duplicate a member of the next generation are
                // mutated again so the population does not collapse.
                for (int retry = 0; retry < kDuplicateRetries &&
                                    std::find(next.begin(), next.end(), *legal) != next.end();
                     ++retry) {
                    mutate(*child);
                    legal = legalize_genome(*child, graph, space);
                    if (!legal) throw InfeasibleError("fusion", "an operator cannot be mapped on any pool chiplet");
                }
                next.push_back(std::move(*legal));
            }
        }
        pop = std::move(next);
        fitness = evaluate_all(pop);
        note_generation(gen);
    }

    const auto& f = cache.at(best_genome);
    if (!f.design) {
        throw InfeasibleError("latency-constraint",
                              "no fusion plan for '" + graph.name() + "' meets the latency constraints");
    }
    result.genome = best_genome;
    result.design = *f.design;
    result.groups = genome_groups(best_genome);
    result.group_batches = group_batches_of(best_genome, result.groups, space);
    return result;
}

GaResult exhaustive_fusion_search(const OperatorGraph& graph, const DesignSpace& space,
                                  Objective objective, const LatencyConstraints& limits,
                                  std::size_t max_nodes) {
    validate_space(graph, space);
    const std::size_t n = graph.size();
    if (n > max_nodes) throw ValidationError("graph too large for exhaustive fusion search");

    // Candidates per (group, batch index) with every memory offered.
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::vector<StageCandidate>> memo;
    auto cands = [&](FusionGroup g, std::size_t bi) -> const std::vector<StageCandidate>& {
        auto key = std::make_tuple(g.begin, g.end, bi);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        CandidateMenus menus;
        menus.memories = space.memories;
        menus.tps = space.tps;
        menus.batches = {space.batches[bi]};
        return memo.emplace(key, enumerate_candidates(profile_group(graph, g), space.pool, menus, space.model))
            .first->second;
    };

    GaResult result;
    double best = kInf;
    bool any_mappable = false;
    const std::uint64_t masks = std::uint64_t{1} << (n - 1);
    for (std::uint64_t mask = 0; mask < masks; ++mask) {
        std::vector<bool> cuts(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) cuts[i] = (mask >> i) & 1U;
        const auto groups = groups_from_cuts(n, cuts);
        const std::size_t nb = space.batches.size();
        std::vector<std::size_t> bidx(groups.size(), 0);
        while (true) {
            StageTable table;
            bool mappable = true;
            for (std::size_t s = 0; s < groups.size() && mappable; ++s) {
                table.push_back(cands(groups[s], bidx[s]));
                mappable = !table.back().empty();
            }
            if (mappable) {
                any_mappable = true;
                std::vector<std::int64_t> gb;
                for (auto b : bidx) gb.push_back(space.batches[b]);
                ++result.evaluations;
                try {
                    auto d = cht_search(table, objective, latency_cap(gb, limits));
                    if (d.objective < best) {
                        best = d.objective;
                        result.design = std::move(d);
                        result.groups = groups;
                        result.group_batches = gb;
                        FusionGenome g;
                        g.cuts = cuts;
                        g.memory.assign(n, 0);
                        g.batch.assign(n, 0);
                        for (std::size_t s = 0; s < groups.size(); ++s) {
                            const auto kind = result.design.stages[s].memory.kind;
                            int mi = 0;
                            for (std::size_t m = 0; m < space.memories.size(); ++m) {
                                if (space.memories[m].kind == kind) mi = static_cast<int>(m);
                            }
                            for (std::size_t i = groups[s].begin; i < groups[s].end; ++i) {
                                g.memory[i] = mi;
                                g.batch[i] = static_cast<int>(bidx[s]);
                            }
                        }
                        result.genome = std::move(g);
                    }
                } catch (const InfeasibleError&) {
                }
            }
            std::size_t s = 0;
            while (s < bidx.size() && ++bidx[s] == nb) bidx[s++] = 0;
            if (s == bidx.size()) break;
        }
    }
    if (!any_mappable) throw InfeasibleError("fusion", "an operator cannot be mapped on any pool chiplet");
    if (!std::isfinite(best)) {
        throw InfeasibleError("latency-constraint",
                              "no fusion plan for '" + graph.name() + "' meets the latency constraints");
    }
    result.best_by_generation = {best};
    result.log_csv = "generation,best_objective,evaluations\n0," + num(best) + "," +
                     std::to_string(result.evaluations) + "\n";
    return result;
}

}  // namespace chipdse
