#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "chipdse/pipesim.hpp"
#include "doctest.h"

using namespace chipdse;

namespace {

StageCandidate stage(double compute, double bytes, double bandwidth, std::int64_t batch = 1) {
    StageCandidate c;
    c.compute_time = compute;
    c.traffic_bytes = bytes;
    c.memory.bandwidth = bandwidth;
    c.memory_time = bytes / bandwidth;
    c.t_cmp = std::max(c.compute_time, c.memory_time);
    c.batch = batch;
    c.e_dyn = 1e-3;
    c.p_static = 0.5;
    return c;
}

AcceleratorDesign design_of(std::vector<StageCandidate> stages) {
    AcceleratorDesign d;
    d.stages = std::move(stages);
    d.period = analytical_period(d);
    return d;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("single stage runs back to back") {
    SimConfig cfg;
    cfg.design = design_of({stage(2e-3, 64.0 * 1024 * 10, 1e9)});
    cfg.inputs = 3;
    auto r = simulate(cfg);
    const double t = cfg.design.stages[0].t_cmp;
    CHECK(rel(r.first_output_latency, t) < 1e-9);
    CHECK(rel(r.total_time, 3 * t) < 1e-9);
    CHECK(r.tiles[0] == 30);
}

TEST_CASE("private buses match the analytical pipeline") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<StageCandidate> st;
        const int p = 1 + static_cast<int>(rng() % 6);
        const std::int64_t b = 1 + static_cast<std::int64_t>(rng() % 4);
        for (int s = 0; s < p; ++s) {
            st.push_back(stage(1e-4 + 1e-3 * u(rng), 1e5 + 4e6 * u(rng), 1e9 + 1e10 * u(rng), b));
        }
        SimConfig cfg;
        cfg.design = design_of(st);
        cfg.inputs = 64 * b;
        auto r = simulate(cfg);
        CHECK(rel(r.period, analytical_period(cfg.design)) < 0.01);
        CHECK(rel(r.first_output_latency, analytical_first_output(cfg.design)) < 0.01);
        CHECK(r.period >= analytical_period(cfg.design) * (1 - 1e-9));
        CHECK(r.energy >= r.dynamic_energy);
        for (int s = 0; s < p; ++s) {
            const auto per_item = static_cast<std::int64_t>(std::ceil(static_cast<double>(b) * st[static_cast<std::size_t>(s)].traffic_bytes / cfg.tile_bytes));
            CHECK(r.tiles[static_cast<std::size_t>(s)] == per_item * 64);
        }
    }
}

TEST_CASE("shared bus contention stretches the period") {
    // Two memory-bound stages, each needing 80% of a shared bus.
    const double bw = 1e9;
    auto a = stage(1e-4, 8e5, bw);
    auto b = stage(1e-4, 8e5, bw);
    SimConfig cfg;
    cfg.design = design_of({a, b});
    cfg.inputs = 50;
    cfg.bus_map = {0, 0};
    auto r = simulate(cfg);
    CHECK(r.period > analytical_period(cfg.design));
    // Bandwidth conservation: the bus must carry every byte.
    CHECK(r.total_time >= 50 * (a.traffic_bytes + b.traffic_bytes) / bw * (1 - 1e-9));
    CHECK(r.period >= (a.traffic_bytes + b.traffic_bytes) / bw * (1 - 1e-9));
    cfg.bus_map = {};
    CHECK(rel(simulate(cfg).period, analytical_period(cfg.design)) < 0.01);
}

TEST_CASE("token grants are fair while demand is pending") {
    SimConfig cfg;
    cfg.design = design_of({stage(1e-5, 4e6, 1e9), stage(1e-5, 4e6, 1e9), stage(1e-5, 4e6, 1e9)});
    cfg.inputs = 4;
    cfg.bus_map = {7, 7, 7};
    cfg.record_grants = true;
    auto r = simulate(cfg);
    REQUIRE(r.grants.size() == 1);
    const auto& g = r.grants[0];
    // Within every run of grants where all three stages had a tile pending,
    // any window of 3K grants serves each stage K +/- 1 times.
    const std::size_t k = 5, window = 3 * k;
    int checked = 0;
    std::size_t run_start = 0;
    for (std::size_t i = 0; i <= g.size(); ++i) {
        if (i < g.size() && g[i].pending == 3) continue;
        for (std::size_t start = run_start; start + window <= i; ++start) {
            std::map<std::size_t, int> count;
            for (std::size_t j = start; j < start + window; ++j) ++count[g[j].stage];
            ++checked;
            for (std::size_t s = 0; s < 3; ++s) CHECK(std::abs(count[s] - static_cast<int>(k)) <= 1);
        }
        run_start = i + 1;
    }
    CHECK(checked > 0);
}

TEST_CASE("zero buffer slots deadlock with a diagnostic") {
    SimConfig cfg;
    cfg.design = design_of({stage(1e-4, 1e4, 1e9), stage(1e-4, 1e4, 1e9)});
    cfg.buffer_slots = 0;
    try {
        simulate(cfg);
        FAIL("expected deadlock");
    } catch (const InfeasibleError& e) {
        CHECK(std::string(e.what()).find("blocked stages: 0,1") != std::string::npos);
    }
}

TEST_CASE("malformed configs") {
    SimConfig cfg;
    CHECK_THROWS_AS(simulate(cfg), ValidationError);
    cfg.design = design_of({stage(1e-4, 1e4, 1e9, 1), stage(1e-4, 1e4, 1e9, 2)});
    CHECK_THROWS_AS(simulate(cfg), ValidationError);
    cfg.design = design_of({stage(1e-4, 1e4, 1e9)});
    cfg.bus_map = {0, 1};
    CHECK_THROWS_AS(simulate(cfg), ValidationError);
}

TEST_CASE("trace output is deterministic") {
    SimConfig cfg;
    cfg.design = design_of({stage(1e-4, 2e5, 1e9), stage(2e-4, 1e5, 1e9)});
    cfg.inputs = 3;
    cfg.trace = true;
    auto a = simulate(cfg);
    auto b = simulate(cfg);
    CHECK(a.trace_csv == b.trace_csv);
    CHECK(a.trace_csv.rfind("time,stage,event\n", 0) == 0);
    CHECK(a.trace_csv.find(",finish") != std::string::npos);
}
