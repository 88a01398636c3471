#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "chipdse/ga.hpp"
#include "doctest.h"

using namespace chipdse;

namespace {

std::vector<ChipletConfig> small_pool() {
    return {make_chiplet(Dataflow::WS, 1, 1), make_chiplet(Dataflow::OS, 2, 4), make_chiplet(Dataflow::RS, 1, 16)};
}

DesignSpace space_with(std::vector<ChipletConfig> pool) {
    DesignSpace s;
    s.pool = std::move(pool);
    return s;
}

// Matmul chain; `edge_bytes[i]` connects node i to i+1.
OperatorGraph matmul_chain(const std::vector<std::int64_t>& dims, const std::vector<std::int64_t>& edge_bytes) {
    std::string text;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const auto d = std::to_string(dims[i]);
        text += "node n" + std::to_string(i) + " matmul m=" + d + " k=" + d + " n=" + d + "\n";
    }
    for (std::size_t i = 0; i < edge_bytes.size(); ++i) {
        text += "edge n" + std::to_string(i) + " n" + std::to_string(i + 1) + " bytes=" +
                std::to_string(edge_bytes[i]) + "\n";
    }
    return parse_network(text, "chain");
}

bool genome_legal(const FusionGenome& g, const OperatorGraph& graph, const DesignSpace& space) {
    for (const auto& grp : genome_groups(g)) {
        for (std::size_t i = grp.begin; i < grp.end; ++i) {
            if (g.memory[i] != g.memory[grp.begin] || g.batch[i] != g.batch[grp.begin]) return false;
        }
        if (!group_feasible(profile_group(graph, grp), space, g.memory[grp.begin])) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("latency factors") {
    CHECK(reaccumulation_periods({1, 1}) == 0.0);
    CHECK(reaccumulation_periods({1, 4}) == 8.0);
    CHECK(reaccumulation_periods({4, 1, 3}) == 8.0 + 6.0);
    CHECK(e2e_factor({2, 2}) == 4.0);
    CHECK(period_factor({1, 8, 2}) == 8.0);
    LatencyConstraints lim;
    lim.max_e2e = 10.0;
    auto cap = latency_cap({1, 2}, lim);
    CHECK(cap.e2e_factor == 5.0);
    CHECK(cap.admits(2.0));
    CHECK_FALSE(cap.admits(2.5));
}

TEST_CASE("an already legal genome is a fixed point") {
    auto g = matmul_chain({64, 64, 64}, {1024, 1024});
    auto space = space_with(small_pool());
    FusionGenome genome{{false, true}, {3, 3, 1}, {0, 0, 0}};
    auto out = legalize_genome(genome, g, space);
    REQUIRE(out);
    CHECK(*out == genome);
}

TEST_CASE("an oversized intermediate gets a cut at its edge") {
    // Largest GLB in the pool is 8 MiB, so a 64 MiB tile never double-buffers.
    auto g = matmul_chain({64, 64, 64, 64}, {1024, 64 * kMiB, 1024});
    auto space = space_with(small_pool());
    FusionGenome genome{{false, false, false}, {3, 3, 3, 3}, {0, 0, 0, 0}};
    auto out = legalize_genome(genome, g, space);
    REQUIRE(out);
    CHECK(out->cuts == std::vector<bool>{false, true, false});
    CHECK(genome_legal(*out, g, space));
}

TEST_CASE("fully fused chain with tiny buffers is cut after every oversized intermediate") {
    std::mt19937_64 rng(11);
    auto space = space_with({make_chiplet(Dataflow::WS, 1, 1)});
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::int64_t> edges;
        for (int i = 0; i < 9; ++i) edges.push_back(rng() % 2 ? 4 * kMiB : 4 * kKiB);
        auto g = matmul_chain(std::vector<std::int64_t>(10, 32), edges);
        FusionGenome genome{std::vector<bool>(9, false), std::vector<int>(10, 3), std::vector<int>(10, 0)};
        auto out = legalize_genome(genome, g, space);
        REQUIRE(out);
        CHECK(genome_legal(*out, g, space));
        for (std::size_t i = 0; i < edges.size(); ++i) CHECK(out->cuts[i] == (edges[i] == 4 * kMiB));
    }
}

TEST_CASE("a node that fits nowhere is infeasible") {
    // 2^20 x 2^20 weights exceed every memory capacity.
    auto g = parse_network("node w matmul m=1 k=1048576 n=1048576\n", "big");
    auto space = space_with(small_pool());
    FusionGenome genome{{}, {0}, {0}};
    CHECK_FALSE(legalize_genome(genome, g, space));
    GaParams p;
    p.population = 3;
    CHECK_THROWS_AS(seed_population(g, space, p), InfeasibleError);
}

TEST_CASE("population of three is exactly the declared seeds") {
    auto g = matmul_chain({64, 64, 64, 64}, {1024, 64 * kMiB, 1024});
    auto space = space_with(small_pool());
    GaParams p;
    p.population = 3;
    auto pop = seed_population(g, space, p);
    REQUIRE(pop.size() == 3);
    CHECK(pop[0].cuts == std::vector<bool>{true, true, true});
    CHECK(pop[1].cuts == std::vector<bool>{false, true, false});
    CHECK(pop[2].cuts == std::vector<bool>{false, true, true});
    for (const auto& x : pop) CHECK(genome_legal(x, g, space));
    p.population = 2;
    CHECK_THROWS_AS(seed_population(g, space, p), ValidationError);
}

TEST_CASE("compute-bound group seeds the cheaper memory") {
    auto g = matmul_chain({2048}, {});
    auto space = space_with(small_pool());
    space.memories = {default_memory(MemoryKind::DDR5), default_memory(MemoryKind::HBM3)};
    const auto prof = profile_group(g, {0, 1});
    CHECK(space.memories[static_cast<std::size_t>(roofline_memory(prof, space, 1))].kind == MemoryKind::DDR5);

    // A memory-bound group keeps the fast memory.
    auto thin = parse_network("node v matmul m=1 k=8192 n=8192\n", "gemv");
    const auto thin_prof = profile_group(thin, {0, 1});
    CHECK(space.memories[static_cast<std::size_t>(roofline_memory(thin_prof, space, 1))].kind == MemoryKind::HBM3);
}

TEST_CASE("roofline seed is the cheapest memory that preserves T_cmp") {
    std::mt19937_64 rng(3);
    auto space = space_with(small_pool());
    for (int trial = 0; trial < 40; ++trial) {
        const auto m = std::int64_t{1} << (rng() % 12);
        const auto kn = std::int64_t{64} << (rng() % 6);
        auto g = parse_network("node a matmul m=" + std::to_string(m) + " k=" + std::to_string(kn) +
                                   " n=" + std::to_string(kn) + "\n",
                               "r");
        const auto prof = profile_group(g, {0, 1});
        const int pick = roofline_memory(prof, space, 1);
        const auto& chosen = space.memories[static_cast<std::size_t>(pick)];
        // Oracle: the pool chiplet with least compute time, then every memory.
        std::optional<StageCandidate> ref;
        for (const auto& c : space.pool) {
            auto x = candidate_eval(prof, c, default_memory(MemoryKind::HBM3), 1, 1);
            if (x && (!ref || x->compute_time < ref->compute_time)) ref = x;
        }
        REQUIRE(ref);
        auto at_pick = candidate_eval(prof, ref->chiplet, chosen, 1, 1);
        REQUIRE(at_pick);
        CHECK(at_pick->t_cmp == ref->t_cmp);
        for (const auto& mem : space.memories) {
            auto x = candidate_eval(prof, ref->chiplet, mem, 1, 1);
            if (x && x->t_cmp == ref->t_cmp) CHECK(mem.cost_per_gb >= chosen.cost_per_gb);
        }
    }
}

TEST_CASE("seeding is deterministic and every member is legal") {
    auto g = matmul_chain({64, 128, 256, 128, 64}, {1024, 4 * kMiB, 1024, 2048});
    auto space = space_with(small_pool());
    space.batches = {1, 2, 4};
    GaParams p;
    p.population = 12;
    p.seed = 9;
    auto a = seed_population(g, space, p);
    auto b = seed_population(g, space, p);
    CHECK(a == b);
    for (const auto& x : a) CHECK(genome_legal(x, g, space));
}

TEST_CASE("one generation returns the best seed design") {
    auto g = matmul_chain({64, 128, 256, 128}, {1024, 4096, 1024});
    auto space = space_with(small_pool());
    GaParams p;
    p.population = 3;
    p.generations = 1;
    auto r = ga_search(g, space, Objective::EC, {}, p);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : seed_population(g, space, p)) {
        best = std::min(best, evaluate_genome(s, g, space, Objective::EC, {}).objective);
    }
    CHECK(r.design.objective == best);
    CHECK(r.best_by_generation.size() == 1);
}

TEST_CASE("GA is deterministic, elitist and independent of thread count") {
    auto g = matmul_chain({64, 128, 256, 512, 256, 128, 64}, {1024, 8192, 4 * kMiB, 65536, 8192, 1024});
    auto space = space_with(small_pool());
    space.batches = {1, 2, 4};
    GaParams p;
    p.seed = 21;
    auto a = ga_search(g, space, Objective::EDPC, {}, p);
    p.threads = 4;
    auto b = ga_search(g, space, Objective::EDPC, {}, p);
    CHECK(a.genome == b.genome);
    CHECK(a.design.objective == b.design.objective);
    CHECK(a.log_csv == b.log_csv);
    CHECK(a.best_by_generation.size() == 10);
    for (std::size_t i = 1; i < a.best_by_generation.size(); ++i) {
        CHECK(a.best_by_generation[i] <= a.best_by_generation[i - 1]);
    }
    CHECK(a.log_csv.rfind("generation,best_objective,evaluations\n", 0) == 0);
}

TEST_CASE("GA on six-node chains stays within 5% of exhaustive fusion") {
    std::mt19937_64 rng(5);
    // Two chiplets x one memory x two tp degrees: at most 4 candidates per stage.
    auto space = space_with({make_chiplet(Dataflow::WS, 1, 1), make_chiplet(Dataflow::OS, 2, 4)});
    space.memories = {default_memory(MemoryKind::HBM3)};
    space.tps = {1, 2};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::int64_t> dims, edges;
        for (int i = 0; i < 6; ++i) dims.push_back(std::int64_t{32} << (rng() % 5));
        for (int i = 0; i < 5; ++i) edges.push_back(std::int64_t{1024} << (rng() % 12));
        auto g = matmul_chain(dims, edges);
        for (auto obj : {Objective::Energy, Objective::EC, Objective::EDPC}) {
            auto ex = exhaustive_fusion_search(g, space, obj, {});
            GaParams p;
            p.seed = static_cast<std::uint64_t>(trial) + 1;
            auto ga = ga_search(g, space, obj, {}, p);
            INFO("trial ", trial, " objective ", to_string(obj), " evaluations ", ga.evaluations);
            CHECK(ga.design.objective >= ex.design.objective * (1 - 1e-12));
            CHECK(ga.design.objective <= 1.05 * ex.design.objective);
        }
    }
}

TEST_CASE("impossible latency constraints name the constraint filter") {
    auto g = matmul_chain({256, 256}, {1024});
    auto space = space_with(small_pool());
    LatencyConstraints lim;
    lim.max_e2e = 1e-15;
    GaParams p;
    try {
        ga_search(g, space, Objective::EC, lim, p);
        FAIL("expected infeasible");
    } catch (const InfeasibleError& e) {
        CHECK(std::string(e.what()).find("latency") != std::string::npos);
    }
    CHECK_THROWS_AS(exhaustive_fusion_search(g, space, Objective::EC, lim), InfeasibleError);
}
