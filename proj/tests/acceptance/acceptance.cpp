// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "chipdse/commands.hpp"
#include "chipdse/format.hpp"
#include "chipdse/pipesim.hpp"

using namespace chipdse;

namespace {

const std::filesystem::path kData = CHIPDSE_DATA_DIR;
constexpr Objective kObjectives[] = {Objective::Energy, Objective::EC, Objective::EDP, Objective::EDPC};
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

StageCandidate cand(double t, double e, double p, double c) {
    StageCandidate s;
    s.t_cmp = t;
    s.e_dyn = e;
    s.p_static = p;
    s.dollar_cost = c;
    return s;
}

StageTable random_table(std::mt19937_64& rng, int stages, int max_m) {
    std::uniform_int_distribution<int> m(1, max_m), grid(1, 12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    StageTable t;
    for (int s = 0; s < stages; ++s) {
        std::vector<StageCandidate> st;
        const int n = m(rng);
        for (int j = 0; j < n; ++j) st.push_back(cand(grid(rng) * 0.25, 10 * u(rng), 3 * u(rng), 0.5 + 3.5 * u(rng)));
        t.push_back(std::move(st));
    }
    return t;
}

std::vector<std::map<std::string, std::string>> read_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    std::stringstream hs(line);
    for (std::string f; std::getline(hs, f, ',');) header.push_back(f);
    std::vector<std::map<std::string, std::string>> rows;
    while (std::getline(in, line)) {
        std::map<std::string, std::string> row;
        std::stringstream ls(line);
        std::size_t i = 0;
        for (std::string f; std::getline(ls, f, ',') && i < header.size(); ++i) row[header[i]] = f;
        rows.push_back(std::move(row));
    }
    return rows;
}

// 1 -------------------------------------------------------------------------

Outcome oracle_chain() {
    Timer timer;
    std::mt19937_64 rng(2024);
    int instances = 0, runs = 0, mismatches = 0, infeasible = 0;
    for (int i = 0; i < 520; ++i) {
        const int p = 1 + static_cast<int>(rng() % 4);
        const auto table = random_table(rng, p, 8);
        ++instances;
        for (auto obj : kObjectives) {
            for (bool capped : {false, true}) {
                LatencyCap cap;
                if (capped) cap.max_period = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
                ++runs;
                std::optional<double> n, s, c;
                auto attempt = [&](auto&& f) -> std::optional<double> {
                    try {
                        return f().objective;
                    } catch (const InfeasibleError&) {
                        return std::nullopt;
                    }
                };
                n = attempt([&] { return naive_search(table, obj, cap); });
                s = attempt([&] { return iso_latency_search(table, obj, cap); });
                c = attempt([&] { return cht_search(table, obj, cap); });
                if (!n) ++infeasible;
                if (n != s || n != c) ++mismatches;
            }
        }
    }
    const double secs = timer.seconds();
    Outcome o;
    o.pass = instances >= 500 && mismatches == 0 && secs < 60.0;
    o.detail = std::to_string(instances) + " instances, " + std::to_string(runs) + " solves (" +
               std::to_string(infeasible) + " infeasible in all three), " + std::to_string(mismatches) +
               " mismatches, " + fmt("%.2f s", secs);
    return o;
}

// 2 -------------------------------------------------------------------------

Outcome complexity() {
    constexpr int P = 4, Q = 64;
    std::vector<double> grid;
    for (int q = 0; q < Q; ++q) grid.push_back(1.0 + 0.125 * q);
    std::vector<double> ratios;
    std::string detail = "c per M:";
    for (int m = 16; m <= 4096; m *= 4) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(m));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        StageTable table;
        for (int s = 0; s < P; ++s) {
            std::vector<StageCandidate> st;
            for (int j = 0; j < m; ++j) {
                // Stages split the 64 latencies between them when M < Q.
                const int q = m >= Q ? j % Q : (s * m + j) % Q;
                st.push_back(cand(grid[static_cast<std::size_t>(q)], 10 * u(rng), 3 * u(rng), 0.5 + 3.5 * u(rng)));
            }
            table.push_back(std::move(st));
        }
        if (candidate_latencies(table).size() != static_cast<std::size_t>(Q)) return {false, "Q is not 64"};
        OpCounter counter;
        cht_search(table, Objective::EDPC, {}, &counter);
        const double lg = std::log2(static_cast<double>(m));
        const double model = P * (m * lg + Q * lg);
        ratios.push_back(static_cast<double>(counter.comparisons) / model);
        detail += " " + std::to_string(m) + "=" + fmt("%.3f", ratios.back());
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    Outcome o;
    o.pass = *hi / *lo <= 2.0;
    detail += fmt("; spread %.3f", *hi / *lo);

    std::mt19937_64 rng(3);
    for (auto [m, p] : std::vector<std::pair<int, int>>{{2, 4}, {3, 3}, {5, 4}, {8, 4}, {6, 5}, {4, 8}}) {
        StageTable table;
        for (int s = 0; s < p; ++s) {
            std::vector<StageCandidate> st;
            for (int j = 0; j < m; ++j) st.push_back(cand(1.0 + (rng() % 8) * 0.5, 1.0 + s + j, 0.1, 1.0));
            table.push_back(std::move(st));
        }
        OpCounter counter;
        naive_search(table, Objective::Energy, {}, &counter);
        const auto expect = static_cast<std::uint64_t>(std::llround(std::pow(m, p)));
        if (counter.tuples != expect) {
            o.pass = false;
            detail += "; naive tuples " + std::to_string(counter.tuples) + " != " + std::to_string(expect);
        }
    }
    detail += "; naive tuples = M^P on 6 instances";
    o.detail = detail;
    return o;
}

// 3 -------------------------------------------------------------------------

// Stage value at T from the candidate list alone: min over candidates with
// T_cmp <= T of (E_dyn + P_static T), times cost for cost-aware objectives.
double scan_objective(const StageTable& table, Objective obj, double t) {
    double sum = 0.0;
    for (const auto& stage : table) {
        double best = kInf;
        for (const auto& seg : make_segments(stage, obj)) {
            if (seg.activation <= t) best = std::min(best, seg.at(t));
        }
        sum += best;
    }
    return objective_from_sum(sum, t, obj);
}

Outcome eq1_suite() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int failures = 0;
    std::string first;
    auto fail = [&](const std::string& why) {
        if (failures++ == 0) first = why;
    };
    for (int i = 0; i < 100; ++i) {
        const auto table = random_table(rng, 1 + static_cast<int>(rng() % 4), 6);
        for (const auto& stage : table) {
            for (const auto& c : stage) {
                if (stage_energy_at(c, c.t_cmp) != c.e_dyn + c.p_static * c.t_cmp) fail("boundary value at T_cmp");
                if (!std::isinf(stage_energy_at(c, std::nextafter(c.t_cmp, 0.0)))) fail("finite below T_cmp");
                double prev = stage_energy_at(c, c.t_cmp);
                for (int k = 1; k <= 20; ++k) {
                    const double e = stage_energy_at(c, c.t_cmp * (1.0 + 0.1 * k));
                    if (e < prev) fail("stage energy decreased in T");
                    prev = e;
                }
            }
        }
        const auto obj = kObjectives[i % 4];
        const auto best = cht_search(table, obj);
        const auto lat = candidate_latencies(table);
        if (!std::binary_search(lat.begin(), lat.end(), best.period)) fail("optimal T is not a breakpoint");
        if (scan_objective(table, obj, best.period) != best.objective) fail("objective at optimal T differs");
        const double lo = lat.front(), hi = lat.back() * 1.5;
        double scan_min = kInf;
        for (int k = 0; k < 10000; ++k) {
            scan_min = std::min(scan_min, scan_objective(table, obj, lo + (hi - lo) * k / 9999.0));
        }
        if (scan_min < best.objective) fail("dense scan beat the breakpoint optimum");
        for (double t : lat) {
            if (scan_objective(table, obj, t) < best.objective) fail("another breakpoint beat the optimum");
        }
    }
    return {failures == 0, failures == 0 ? "100 instances: monotone, inclusive at T_cmp, infinite below, "
                                           "optimum at a breakpoint and <= 10^4-point scan (tolerance 0)"
                                         : std::to_string(failures) + " failures, first: " + first};
}

// 4 -------------------------------------------------------------------------

struct MemoryComparison {
    double mixed = 0.0;
    double hbm = 0.0;
    bool same_t = false;
};

// GA design under the full memory menu against the same stages on HBM3.
MemoryComparison memory_mix(const OperatorGraph& graph) {
    DesignSpace space;
    space.pool = full_chiplet_menu();
    GaParams ga;
    ga.population = 12;
    ga.generations = 10;
    const auto r = ga_search(graph, space, Objective::EC, {}, ga);
    const auto hbm = default_memory(MemoryKind::HBM3);
    MemoryComparison out;
    double t_hbm = 0.0;
    for (const auto& s : r.design.stages) {
        out.mixed += s.memory_cost;
        const auto h = candidate_eval(graph, s.range, s.chiplet, hbm, s.batch, s.tp, space.model);
        if (!h) return {kInf, 0.0, false};
        out.hbm += h->memory_cost;
        t_hbm = std::max(t_hbm, h->t_cmp);
    }
    // The HBM3 design runs at the same period; every stage must admit it.
    out.same_t = t_hbm <= r.design.period && std::max(t_hbm, r.design.period) == r.design.period;
    return out;
}

OperatorGraph synthetic_network(std::mt19937_64& rng) {
    std::string text;
    std::uniform_int_distribution<int> dim(8, 32);
    const int n = 6 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
        if (i % 4 == 3) {
            text += "node n" + std::to_string(i) + " elementwise e=" + std::to_string(1 << 20) + " ops=2\n";
        } else {
            text += "node n" + std::to_string(i) + " matmul m=" + std::to_string(128 * dim(rng)) +
                    " k=" + std::to_string(128 * dim(rng)) + " n=" + std::to_string(128 * dim(rng)) + " bpe=1\n";
        }
        if (i > 0) text += "edge n" + std::to_string(i - 1) + " n" + std::to_string(i) + " bytes=1048576\n";
    }
    return parse_network(text, "synthetic");
}

double compute_bound_share(const OperatorGraph& g) {
    const auto chip = make_chiplet(Dataflow::WS, 2, 4);
    int bound = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        bool both = true;
        for (auto kind : {MemoryKind::GDDR7, MemoryKind::DDR5}) {
            const auto c = candidate_eval(g, {i, i + 1}, chip, default_memory(kind), 1, 1);
            both = both && c && c->compute_time >= c->memory_time;
        }
        bound += both;
    }
    return static_cast<double>(bound) / static_cast<double>(g.size());
}

Outcome memory_mix_property() {
    std::mt19937_64 rng(9);
    int cases = 0, failures = 0;
    double worst = kInf;
    for (int i = 0; i < 12; ++i) {
        const auto g = synthetic_network(rng);
        if (compute_bound_share(g) < 0.5) continue;
        ++cases;
        const auto m = memory_mix(g);
        if (!m.same_t || !(m.mixed < m.hbm)) ++failures;
        worst = std::min(worst, 1.0 - m.mixed / m.hbm);
    }
    const auto heavy = load_network(kData / "workloads" / "compute_heavy.net");
    const double share = compute_bound_share(heavy);
    const auto m = memory_mix(heavy);
    const double reduction = 1.0 - m.mixed / m.hbm;
    Outcome o;
    o.pass = cases >= 10 && failures == 0 && share >= 0.5 && m.same_t && reduction > 0.25;
    o.detail = std::to_string(cases) + " synthetic networks, " + std::to_string(failures) +
               " without a strict saving (smallest saving " + fmt("%.1f%%", 100 * worst) +
               "); compute_heavy: " + fmt("%.0f%% compute-bound, ", 100 * share) + "memory $" + fmt("%.1f", m.mixed) +
               " vs HBM3 $" + fmt("%.1f", m.hbm) + fmt(" (%.1f%% lower), ", 100 * reduction) +
               (m.same_t ? "same T" : "T differs");
    return o;
}

// 5 -------------------------------------------------------------------------

RunManifest exhaustive_toy() {
    auto m = load_manifest(kData / "manifests" / "toy.manifest");
    m.config.inner = InnerSearch::Exhaustive;
    m.config.pool_search = PoolSearch::Exhaustive;
    m.config.pool_budget = 2;  // one chiplet per network fits, so the pool contains nsic
    return m;
}

Outcome paradigm_ordering() {
    auto m = exhaustive_toy();
    int checks = 0, violations = 0;
    for (auto obj : kObjectives) {
        m.objective = obj;
        const auto r = run_paradigms(m, all_paradigms());
        for (std::size_t n = 0; n < r[0].designs.size(); ++n) {
            const double asic = r[0].designs[n].design.objective, nsic = r[1].designs[n].design.objective,
                         pool = r[2].designs[n].design.objective, free = r[3].designs[n].design.objective;
            checks += 3;
            violations += !(free <= pool) + !(pool <= nsic) + !(nsic <= asic);
        }
    }
    return {violations == 0, std::to_string(checks) + " comparisons over 4 objectives x 2 toy networks, " +
                                 std::to_string(violations) + " violations"};
}

// 6 -------------------------------------------------------------------------

Outcome pool_size_sweep() {
    Timer timer;
    std::vector<ChipletConfig> menu;
    for (auto df : {Dataflow::RS, Dataflow::OS, Dataflow::WS}) {
        for (int pe : {1, 2}) {
            for (int glb : {1, 4}) menu.push_back(make_chiplet(df, pe, glb));
        }
    }
    std::sort(menu.begin(), menu.end());
    const std::vector<NetworkTarget> nets = {{load_network(kData / "workloads" / "toy_cnn.net"), {}, {1}},
                                             {load_network(kData / "workloads" / "toy_attn.net"), {}, {1}}};
    ScoringParams sp;
    sp.inner = InnerSearch::Exhaustive;
    sp.memories = {default_memory(MemoryKind::GDDR7), default_memory(MemoryKind::HBM3)};
    std::vector<double> refs;
    for (const auto& n : nets) refs.push_back(reference_objective(n, sp));
    std::vector<double> best;
    for (std::size_t b = 1; b <= 8; ++b) best.push_back(exhaustive_pool_search(menu, b, nets, refs, sp).score);
    bool nonincreasing = true, diminishing = true;
    for (std::size_t i = 1; i < best.size(); ++i) nonincreasing = nonincreasing && best[i] <= best[i - 1];
    for (std::size_t i = 1; i + 1 < best.size(); ++i) {
        diminishing = diminishing && best[i - 1] - 2 * best[i] + best[i + 1] >= 0.0;
    }
    const double secs = timer.seconds();
    std::string detail = "scores";
    for (double s : best) detail += " " + fmt("%.6g", s);
    detail += nonincreasing ? "; nonincreasing" : "; INCREASES somewhere";
    detail += diminishing ? "; second differences >= 0" : "; a second difference is negative";
    detail += fmt("; %.1f s", secs);
    return {nonincreasing && diminishing && secs < 300.0, detail};
}

// 7 -------------------------------------------------------------------------

// Checks written against the placement data only.
std::string independent_check(const Placement& p) {
    for (std::size_t i = 0; i < p.rects.size(); ++i) {
        const auto& a = p.rects[i];
        if (a.x < 0 || a.y < 0 || a.x + a.w > p.width || a.y + a.h > p.height) return "out of bounds";
        for (std::size_t j = i + 1; j < p.rects.size(); ++j) {
            const auto& b = p.rects[j];
            if (a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h) return "overlap";
        }
    }
    if (p.routes.size() != p.nets.size()) return "unrouted net";
    std::map<std::tuple<int, int, int, int>, int> use;
    for (const auto& r : p.routes) {
        if (r.path.empty()) return "empty route";
        for (std::size_t k = 0; k < r.path.size(); ++k) {
            const auto& q = r.path[k];
            if (q.x < 0 || q.y < 0 || q.x > p.width || q.y > p.height) return "route leaves the interposer";
            if (k == 0) continue;
            const auto& prev = r.path[k - 1];
            if (std::abs(q.x - prev.x) + std::abs(q.y - prev.y) != 1) return "route jumps";
            const int x0 = std::min(q.x, prev.x), y0 = std::min(q.y, prev.y);
            const bool horizontal = q.y == prev.y;
            for (const auto& rc : p.rects) {
                const bool inside = horizontal ? (rc.y < y0 && y0 < rc.y + rc.h && rc.x <= x0 && x0 + 1 <= rc.x + rc.w)
                                               : (rc.x < x0 && x0 < rc.x + rc.w && rc.y <= y0 && y0 + 1 <= rc.y + rc.h);
                if (inside) return "route crosses a chiplet";
            }
            if (++use[{x0, y0, horizontal, 0}] > p.edge_capacity) return "edge over capacity";
        }
    }
    return "";
}

Outcome pnr_validity() {
    std::mt19937_64 rng(31);
    const auto menu = full_chiplet_menu();
    int bad = 0, not_minimal = 0;
    std::string first;
    for (int trial = 0; trial < 200; ++trial) {
        AcceleratorDesign d;
        const int stages = 1 + static_cast<int>(rng() % 6);
        for (int s = 0; s < stages; ++s) {
            StageCandidate c;
            c.chiplet = menu[rng() % menu.size()];
            c.tp = 1 + static_cast<int>(rng() % 2);
            d.stages.push_back(c);
        }
        const auto fp = minimize_footprint(d);
        const auto why = independent_check(fp.placement);
        if (!why.empty() || fp.placement.width != fp.side || fp.placement.height != fp.side) {
            if (bad++ == 0) first = why.empty() ? "not square at the reported side" : why;
        }
        if (fp.side > 1 && place_and_route(rect_specs(d), fp.side - 1, fp.side - 1)) ++not_minimal;
    }
    return {bad == 0 && not_minimal == 0,
            "200 random designs: " + std::to_string(bad) + " invalid" + (first.empty() ? "" : " (" + first + ")") +
                ", " + std::to_string(not_minimal) + " where side - 1 also fits"};
}

// 8 -------------------------------------------------------------------------

Outcome pipesim_agreement() {
    double worst_period = 0.0, worst_first = 0.0;
    int fixtures = 0;
    DesignSpace space;
    space.pool = full_chiplet_menu();
    GaParams ga;
    for (const auto& entry : std::filesystem::directory_iterator(kData / "workloads")) {
        const auto g = load_network(entry.path());
        const auto r = ga_search(g, space, Objective::EC, {}, ga);
        SimConfig cfg;
        cfg.design = r.design;
        cfg.inputs = 64;
        const auto rep = simulate(cfg);
        worst_period = std::max(worst_period, std::abs(rep.period - analytical_period(r.design)) /
                                                  analytical_period(r.design));
        worst_first = std::max(worst_first, std::abs(rep.first_output_latency - analytical_first_output(r.design)) /
                                                analytical_first_output(r.design));
        ++fixtures;
    }
    // Two memory-bound GEMV stages on one DDR5 bus.
    const auto gemv = parse_network("node a matmul m=1 k=4096 n=4096\nnode b matmul m=1 k=4096 n=4096\n"
                                    "edge a b bytes=4096\n",
                                    "gemv");
    const auto chip = make_chiplet(Dataflow::WS, 2, 4);
    const auto ddr = default_memory(MemoryKind::DDR5);
    AcceleratorDesign d;
    for (std::size_t i = 0; i < 2; ++i) d.stages.push_back(*candidate_eval(gemv, {i, i + 1}, chip, ddr, 1, 1));
    d.period = analytical_period(d);
    SimConfig cfg;
    cfg.design = d;
    cfg.inputs = 32;
    cfg.bus_map = {0, 0};
    const auto shared = simulate(cfg);
    const double bytes = d.stages[0].traffic_bytes + d.stages[1].traffic_bytes;
    const bool contended = shared.period > analytical_period(d);
    const bool bound = shared.period >= bytes / ddr.bandwidth * (1 - 1e-9) &&
                       shared.total_time >= cfg.inputs * bytes / ddr.bandwidth * (1 - 1e-9);
    return {worst_period < 0.01 && worst_first < 0.01 && contended && bound,
            std::to_string(fixtures) + " fixtures, worst period error " + fmt("%.2e", worst_period) +
                ", worst first-output error " + fmt("%.2e", worst_first) + "; shared bus period " +
                fmt("%.3g s", shared.period) + " vs analytical " + fmt("%.3g s", analytical_period(d)) +
                " and bytes/bandwidth " + fmt("%.3g s", bytes / ddr.bandwidth)};
}

// 9 -------------------------------------------------------------------------

Outcome scenario_constraints() {
    int checks = 0, violations = 0, runs = 0;
    std::string detail;
    auto run = [&](RunManifest m, const std::string& label) {
        for (std::uint64_t seed : {1, 2}) {
            m.seed = seed;
            const auto b = cmd_dse(m);
            ++runs;
            for (const auto& row : read_csv(b.at("constraints.csv"))) {
                ++checks;
                violations += row.at("pass") != "1";
            }
        }
        // GA over the whole menu as well.
        auto sc = [&] {
            std::vector<OperatorGraph> graphs;
            for (const auto& w : m.workloads) graphs.push_back(load_network(w.path));
            return build_scenario(*m.scenario, std::move(graphs), m.config.scenario);
        }();
        DesignSpace base;
        base.pool = full_chiplet_menu();
        const auto solved = solve_scenario(sc, base, m.objective, m.config.ga);
        std::vector<ScenarioDesign> designs;
        for (const auto& s : solved) designs.push_back({s.design, s.group_batches});
        const auto v = check_constraints(designs, sc);
        for (const auto& c : v.checks) {
            ++checks;
            violations += !c.pass;
        }
        ++runs;
        detail += (detail.empty() ? "" : ", ") + label;
    };
    run(load_manifest(kData / "manifests" / "chatbot.manifest"), "chatbot");
    run(load_manifest(kData / "manifests" / "summarization.manifest"), "summarization");
    auto av = load_manifest(kData / "manifests" / "av.manifest");
    run(av, "av 33 ms");
    av.config.scenario.av_deadline = 0.010;
    run(av, "av 10 ms");
    return {violations == 0 && checks > 0, detail + ": " + std::to_string(runs) + " runs, " +
                                               std::to_string(checks) + " checks, " + std::to_string(violations) +
                                               " violations"};
}

// 10 ------------------------------------------------------------------------

Outcome spec_decode() {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double max_speedup = 0.0;
    int configs = 0;
    for (int k = 5; k <= 9; ++k) {
        for (int i = 0; i <= 20; ++i) {
            SpecDecodeConfig cfg;
            cfg.k = k;
            cfg.tar = 1.0 + k * i / 20.0;
            SpecDecodeTimes t;
            t.t_target_token = 0.01 + 0.1 * u(rng);
            t.t_draft = t.t_target_token / k * u(rng);
            t.t_verify = t.t_target_token * (1.0 + u(rng));
            t.e_draft_step = u(rng);
            t.e_verify = 10 * u(rng);
            max_speedup = std::max(max_speedup, spec_decode_eval(t, cfg).speedup);
            ++configs;
        }
    }
    const auto b = cmd_dse(load_manifest(kData / "manifests" / "spec_decode.manifest"));
    const auto row = read_csv(b.at("specdecode.csv")).at(0);
    const double run_speedup = std::stod(row.at("speedup"));
    max_speedup = std::max(max_speedup, run_speedup);

    SpecDecodeTimes times;
    times.t_draft = std::stod(row.at("t_draft"));
    times.t_verify = std::stod(row.at("t_verify"));
    times.t_target_token = std::stod(row.at("t_target_token"));
    times.e_draft_step = 0.04;
    times.e_verify = 1.7;
    SpecDecodeConfig cfg;
    cfg.k = 5;
    cfg.tar = 5.6;
    const auto scalar = spec_decode_eval(times, cfg);
    const auto stepped = spec_decode_iterate(times, cfg, 1000);
    const double d_tok = std::abs(scalar.tokens_per_iteration - stepped.tokens_per_iteration);
    const double d_energy = std::abs(scalar.energy_per_token - stepped.energy_per_token);
    return {max_speedup <= 2.0 && d_tok <= 1e-9 && d_energy <= 1e-9,
            std::to_string(configs + 1) + " configurations, max speedup " + fmt("%.4f", max_speedup) +
                " (spec-decode run " + fmt("%.4f", run_speedup) + "); TAR 5.6, k 5: tokens/iteration diff " +
                fmt("%.1e", d_tok) + ", energy/token diff " + fmt("%.1e", d_energy)};
}

// 11 ------------------------------------------------------------------------

Outcome cost_model() {
    int super_checks = 0, super_fail = 0;
    for (double d0 : {0.0002, 0.0005, 0.001, 0.002, 0.005}) {
        CostParams p;
        p.defect_density = d0;
        for (double a = 1.0; 2 * a <= p.reticle_limit_mm2; a += 1.0) {
            ++super_checks;
            super_fail += !(die_cost(2 * a, p) > 2 * die_cost(a, p));
        }
    }
    int perim_fail = 0;
    for (int n = 1; n <= 16; ++n) perim_fail += perimeter_scaling(n) != std::sqrt(static_cast<double>(n));
    int nre_fail = 0;
    for (std::size_t eco = 1; eco <= 8; ++eco) {
        double prev = kInf;
        for (double v = 1e4; v <= 1e8; v *= 1.5) {
            CostParams p;
            p.volume = v;
            const double x = amortized_nre(eco, p);
            nre_fail += !(x < prev);
            prev = x;
        }
    }
    return {super_fail == 0 && perim_fail == 0 && nre_fail == 0,
            std::to_string(super_checks) + " superlinearity checks (" + std::to_string(super_fail) +
                " failed), perimeter sqrt(N) exact for N=1..16 (" + std::to_string(perim_fail) +
                " failed), NRE strictly decreasing (" + std::to_string(nre_fail) + " failed)"};
}

// 12 ------------------------------------------------------------------------

Outcome determinism() {
    int bundles = 0, diffs = 0;
    auto check = [&](const std::function<Bundle(const RunManifest&)>& f, RunManifest m) {
        m.config.threads = 1;
        const auto ref = f(m);
        for (int threads : {1, 2, 4}) {
            m.config.threads = threads;
            ++bundles;
            diffs += f(m) != ref;
        }
    };
    const auto toy = load_manifest(kData / "manifests" / "toy.manifest");
    check(cmd_dse, toy);
    check([](const RunManifest& m) { return cmd_compare(m, all_paradigms()); }, toy);
    check([](const RunManifest& m) { return cmd_cost(m); }, toy);
    check([](const RunManifest& m) { return cmd_simulate(m, true); }, toy);
    check([](const RunManifest& m) { return cmd_pnr(m, true); }, toy);
    check(cmd_dse, load_manifest(kData / "manifests" / "chatbot.manifest"));
    return {diffs == 0, std::to_string(bundles) + " bundles at 1, 2 and 4 threads, " + std::to_string(diffs) +
                            " differ from the single-thread run"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
        {"oracle chain", oracle_chain},
        {"complexity evidence", complexity},
        {"stage energy and optimal period", eq1_suite},
        {"memory mix beats all-HBM3", memory_mix_property},
        {"paradigm ordering", paradigm_ordering},
        {"pool-size sweep", pool_size_sweep},
        {"place and route validity", pnr_validity},
        {"pipeline simulator agreement", pipesim_agreement},
        {"scenario constraints", scenario_constraints},
        {"speculative decoding", spec_decode},
        {"cost model", cost_model},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %2zu %s: %s  (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
