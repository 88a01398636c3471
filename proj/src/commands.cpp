#include "chipdse/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "chipdse/format.hpp"
#include "chipdse/pipesim.hpp"
#include "json.hpp"

namespace chipdse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::array<std::string_view, 4> kParadigmNames = {"homogeneous-asic-all", "homogeneous-nsic",
                                                            "heterogeneous-pool", "heterogeneous-unconstrained"};

struct PoolOutcome {
    ChipletPool pool;
    double score = kInf;
    std::vector<GaResult> designs;
    std::string trace_csv;
    std::size_t evaluations = 0;
};

std::vector<double> references(const std::vector<NetworkTarget>& nets, const ScoringParams& scoring) {
    std::vector<double> refs;
    for (const auto& n : nets) refs.push_back(reference_objective(n, scoring));
    return refs;
}

std::vector<GaResult> require_designs(const PoolScore& ps, const std::vector<NetworkTarget>& nets,
                                      const ChipletPool& pool) {
    std::vector<GaResult> out;
    for (std::size_t i = 0; i < nets.size(); ++i) {
        if (!ps.designs[i]) {
            const auto& why = ps.failures[i];
            throw InfeasibleError(why ? why->layer() : "pool", "pool " + pool.id() + " has no design for '" +
                                                                   nets[i].graph.name() + "'" +
                                                                   (why ? std::string(": ") + why->what() : ""));
        }
        out.push_back(*ps.designs[i]);
    }
    return out;
}

PoolOutcome search_pool(const RunManifest& m, const std::vector<NetworkTarget>& nets, std::size_t budget) {
    const auto scoring = scoring_params(m);
    const auto menu = m.config.chiplet_menu();
    budget = std::min(budget, menu.size());
    const auto refs = references(nets, scoring);
    PoolOutcome out;
    if (m.config.pool_search == PoolSearch::Exhaustive) {
        auto e = exhaustive_pool_search(menu, budget, nets, refs, scoring);
        if (!std::isfinite(e.score)) {
            // Name the failing filter when even the whole menu cannot serve a network.
            const auto all = ChipletPool::from(menu);
            require_designs(pool_score(all, nets, refs, scoring), nets, all);
            throw InfeasibleError("pool", "no pool of " + std::to_string(budget) + " chiplets serves every network");
        }
        out.pool = e.pool;
        out.score = e.score;
        out.evaluations = e.pools_scored;
        out.designs = require_designs(pool_score(e.pool, nets, refs, scoring), nets, e.pool);
        return out;
    }
    std::mt19937_64 rng(m.seed);
    auto initial = random_pool(menu, budget, rng);
    SaParams sa = m.config.sa;
    sa.seed = m.seed;
    sa.inner_ga.seed = m.seed;
    sa.final_ga = scoring.ga;
    auto r = sa_search(initial, menu, nets, scoring, sa);
    out.pool = r.pool;
    out.score = r.score;
    out.designs = r.designs;
    out.trace_csv = r.trace_csv;
    out.evaluations = r.evaluations;
    return out;
}

MetricOptions metric_options(const RunManifest& m, const NetworkTarget& net, const GaResult& r,
                             std::size_t ecosystem, double area) {
    MetricOptions o;
    o.cost_mode = m.cost_mode;
    if (std::isfinite(net.limits.max_e2e)) {
        o.delay_mode = DelayMode::EndToEnd;
        o.e2e_factor = e2e_factor(r.group_batches);
    }
    o.interposer_area_mm2 = area;
    o.ecosystem_size = ecosystem;
    return o;
}

std::size_t used_chiplets(const std::vector<GaResult>& designs) {
    std::vector<const AcceleratorDesign*> ds;
    for (const auto& d : designs) ds.push_back(&d.design);
    return ecosystem_of(ds).size();
}

std::string pool_csv(const ChipletPool& pool) {
    std::string s = "id,dataflow,pe_scale,glb_scale,pe_rows,glb_kib,area_mm2\n";
    for (const auto& c : pool.members) {
        s += c.id + "," + std::string(to_string(c.dataflow)) + "," + std::to_string(c.pe_scale) + "," +
             std::to_string(c.glb_scale) + "," + std::to_string(c.pe_rows) + "," +
             std::to_string(c.glb_bytes / kKiB) + "," + num(c.area_mm2) + "\n";
    }
    return s;
}

std::string designs_csv(const std::vector<NetworkTarget>& nets, const std::vector<GaResult>& designs) {
    std::string s = "network,stage,first_node,last_node,chiplet,memory,tp,batch,t_cmp,e_dyn,p_static,dollar_cost\n";
    for (std::size_t n = 0; n < nets.size(); ++n) {
        const auto& g = nets[n].graph;
        const auto& d = designs[n].design;
        for (std::size_t i = 0; i < d.stages.size(); ++i) {
            const auto& st = d.stages[i];
            s += g.name() + "," + std::to_string(i) + "," + g.node(st.range.begin).id + "," +
                 g.node(st.range.end - 1).id + "," + st.chiplet.id + "," + std::string(to_string(st.memory.kind)) +
                 "," + std::to_string(st.tp) + "," + std::to_string(st.batch) + "," + num(st.t_cmp) + "," +
                 num(st.e_dyn) + "," + num(st.p_static) + "," + num(st.dollar_cost) + "\n";
        }
    }
    return s;
}

const char* kMetricsHeader = "network,period_s,delay_s,energy_j,cost,ec,edp,edpc,ec_stagewise,objective,stages,interposer_mm2\n";

std::string metrics_row(const std::string& name, const GaResult& r, const MetricSet& ms, double area) {
    return name + "," + num(r.design.period) + "," + num(ms.delay) + "," + num(ms.energy) + "," +
           num(ms.dollar_cost) + "," + num(ms.ec) + "," + num(ms.edp) + "," + num(ms.edpc) + "," +
           num(ms.ec_stagewise) + "," + num(r.design.objective) + "," + std::to_string(r.design.stages.size()) +
           "," + num(area) + "\n";
}

std::vector<ScenarioDesign> scenario_designs(const std::vector<GaResult>& designs) {
    std::vector<ScenarioDesign> out;
    for (const auto& d : designs) out.push_back({d.design, d.group_batches});
    return out;
}

std::string constraints_csv(const Verdict& v) {
    std::string s = "graph,constraint,limit,value,slack,pass\n";
    for (const auto& c : v.checks) {
        s += c.graph + "," + c.constraint + "," + num(c.limit) + "," + num(c.value) + "," + num(c.slack) + "," +
             (c.pass ? "1" : "0") + "\n";
    }
    return s;
}

DesignSpace pool_space(const ChipletPool& pool, const NetworkTarget& net, const ScoringParams& scoring) {
    return network_space(pool, net, scoring);
}

// Per-network GA over the whole configured menu.
std::vector<GaResult> menu_designs(const RunManifest& m, const std::vector<NetworkTarget>& nets) {
    const auto scoring = scoring_params(m);
    const auto pool = ChipletPool::from(m.config.chiplet_menu());
    std::vector<GaResult> out;
    for (const auto& n : nets) out.push_back(best_network_design(pool, n, scoring));
    return out;
}

Scenario manifest_scenario(const RunManifest& m) {
    std::vector<OperatorGraph> graphs;
    for (const auto& w : m.workloads) graphs.push_back(load_network(w.path));
    return build_scenario(*m.scenario, std::move(graphs), m.config.scenario);
}

}  // namespace

void write_bundle(const std::filesystem::path& dir, const Bundle& bundle) {
    for (const auto& [rel, content] : bundle) {
        const auto path = dir / rel;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ValidationError("cannot write '" + path.string() + "'");
        out << content;
    }
}

std::vector<NetworkTarget> manifest_networks(const RunManifest& m) {
    std::vector<NetworkTarget> nets;
    if (m.scenario) {
        for (auto& g : manifest_scenario(m).graphs) nets.push_back({std::move(g.graph), g.limits, g.batches});
        return nets;
    }
    std::vector<OperatorGraph> graphs;
    for (const auto& w : m.workloads) graphs.push_back(load_network(w.path));
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        const auto& w = m.workloads[i];
        nets.push_back({std::move(graphs[i]), w.limits, w.batches ? *w.batches : m.config.batches});
    }
    std::set<std::string> names;
    for (const auto& n : nets) {
        if (!names.insert(n.graph.name()).second) {
            throw ValidationError("two workloads are named '" + n.graph.name() + "'");
        }
    }
    return nets;
}

ScoringParams scoring_params(const RunManifest& m) {
    ScoringParams s;
    s.objective = m.objective;
    s.inner = m.config.inner;
    s.ga = m.config.ga;
    s.ga.seed = m.seed;
    s.ga.threads = m.config.threads;
    s.aggregation = m.config.aggregation;
    s.memories = m.config.memories;
    s.tps = m.config.tps;
    s.model = m.config.model;
    s.threads = m.config.threads;
    return s;
}

Bundle cmd_dse(const RunManifest& m) {
    const auto nets = manifest_networks(m);
    auto outcome = search_pool(m, nets, m.config.pool_budget);
    const auto scoring = scoring_params(m);

    // Speculative decoding: the draft must keep up with T_target / k. If the
    // pool's draft design is too slow, re-solve it under that period cap.
    std::optional<SpecDecodeResult> spec;
    std::optional<SpecDecodeTimes> spec_times;
    if (m.scenario == ScenarioKind::SpecDecode) {
        const auto& cfg = m.config.scenario.spec;
        auto times = spec_decode_times(outcome.designs[0].design, outcome.designs[1].design, nets[1].graph, cfg.k,
                                       m.config.model);
        if (times.t_draft * cfg.k > times.t_target_token) {
            auto draft = nets[0];
            draft.limits.max_period = std::min(draft.limits.max_period, times.t_target_token / cfg.k);
            try {
                outcome.designs[0] = best_network_design(outcome.pool, draft, scoring);
            } catch (const InfeasibleError&) {
                throw InfeasibleError("spec-decode", "no draft design in pool " + outcome.pool.id() +
                                                         " runs within T_target / k");
            }
            times = spec_decode_times(outcome.designs[0].design, outcome.designs[1].design, nets[1].graph, cfg.k,
                                      m.config.model);
        }
        spec_times = times;
        spec = spec_decode_eval(times, cfg);
    }

    Bundle b;
    b["manifest.txt"] = dump_manifest(m);
    b["pool.csv"] = pool_csv(outcome.pool);
    b["designs.csv"] = designs_csv(nets, outcome.designs);
    if (!outcome.trace_csv.empty()) b["anneal.csv"] = outcome.trace_csv;

    std::string metrics_csv = kMetricsHeader;
    nlohmann::ordered_json report;
    report["seed"] = m.seed;
    report["objective"] = std::string(to_string(m.objective));
    report["cost_mode"] = std::string(to_string(m.cost_mode));
    report["pool"] = nlohmann::ordered_json::array();
    for (const auto& c : outcome.pool.members) report["pool"].push_back(c.id);
    report["pool_score"] = outcome.score;
    report["pools_scored"] = outcome.evaluations;
    report["networks"] = nlohmann::ordered_json::array();
    const std::size_t eco = std::max<std::size_t>(1, used_chiplets(outcome.designs));
    for (std::size_t i = 0; i < nets.size(); ++i) {
        const auto& r = outcome.designs[i];
        const auto fp = minimize_footprint(r.design, m.config.pnr);
        const auto problems = validate_placement(fp.placement);
        if (!problems.empty()) throw std::logic_error("layout for '" + nets[i].graph.name() + "': " + problems[0]);
        const double area = fp.placement.area_mm2();
        const auto ms = metrics(r.design, metric_options(m, nets[i], r, eco, area), m.config.model.cost);
        const auto& name = nets[i].graph.name();
        metrics_csv += metrics_row(name, r, ms, area);
        b["layouts/" + name + ".txt"] = ascii_dump(fp.placement);
        b["layouts/" + name + ".json"] = json_dump(fp.placement);
        nlohmann::ordered_json jn;
        jn["name"] = name;
        jn["stages"] = r.design.stages.size();
        jn["period_s"] = r.design.period;
        jn["objective"] = r.design.objective;
        jn["energy_j"] = ms.energy;
        jn["cost"] = ms.dollar_cost;
        jn["ec"] = ms.ec;
        jn["edp"] = ms.edp;
        jn["edpc"] = ms.edpc;
        jn["interposer_side"] = fp.side;
        jn["interposer_mm2"] = area;
        report["networks"].push_back(jn);
    }
    b["metrics.csv"] = metrics_csv;

    if (m.scenario) {
        const auto sc = manifest_scenario(m);
        const auto verdict = check_constraints(scenario_designs(outcome.designs), sc);
        b["constraints.csv"] = constraints_csv(verdict);
        report["constraints_pass"] = verdict.pass;
        if (!verdict.pass) throw std::logic_error("an emitted design violates its scenario constraints");

        // Uniform against per-stage batching on each period-limited graph's
        // chosen grouping.
        std::string batching = "network,plan,objective,stage_batches,max_boundary_buffer_bytes\n";
        for (std::size_t i = 0; i < nets.size(); ++i) {
            if (std::isfinite(nets[i].limits.max_e2e) || nets[i].batches.size() < 2) continue;
            auto space = pool_space(outcome.pool, nets[i], scoring);
            for (const bool uniform : {true, false}) {
                const auto plan = uniform ? uniform_batch_search(nets[i].graph, outcome.designs[i].groups, space,
                                                                 m.objective, nets[i].limits)
                                          : nonuniform_batch_search(nets[i].graph, outcome.designs[i].groups, space,
                                                                    m.objective, nets[i].limits);
                std::string sb;
                for (auto x : plan.stage_batches) sb += (sb.empty() ? "" : ";") + std::to_string(x);
                double buf = 0.0;
                for (auto x : plan.boundary_buffer_bytes) buf = std::max(buf, x);
                batching += nets[i].graph.name() + "," + (uniform ? "uniform" : "per-stage") + "," +
                            num(plan.objective) + "," + sb + "," + num(buf) + "\n";
            }
        }
        b["batching.csv"] = batching;
    }
    if (spec) {
        b["specdecode.csv"] =
            "k,tar,t_draft,t_verify,t_target_token,tokens_per_iteration,iteration_time,raw_speedup,speedup,"
            "energy_per_token\n" +
            std::to_string(m.config.scenario.spec.k) + "," + num(m.config.scenario.spec.tar) + "," +
            num(spec_times->t_draft) + "," + num(spec_times->t_verify) + "," + num(spec_times->t_target_token) +
            "," + num(spec->tokens_per_iteration) + "," + num(spec->iteration_time) + "," + num(spec->raw_speedup) +
            "," + num(spec->speedup) + "," + num(spec->energy_per_token) + "\n";
        report["spec_decode_speedup"] = spec->speedup;
    }
    b["report.json"] = report.dump(1) + "\n";
    return b;
}

Paradigm parse_paradigm(std::string_view text) {
    for (std::size_t i = 0; i < kParadigmNames.size(); ++i) {
        if (kParadigmNames[i] == text) return static_cast<Paradigm>(i);
    }
    throw ValidationError("unknown paradigm '" + std::string(text) + "'");
}

std::string_view to_string(Paradigm p) { return kParadigmNames.at(static_cast<std::size_t>(p)); }

std::vector<Paradigm> all_paradigms() {
    return {Paradigm::HomogeneousAsicAll, Paradigm::HomogeneousNsic, Paradigm::HeterogeneousPool,
            Paradigm::HeterogeneousUnconstrained};
}

std::vector<ParadigmResult> run_paradigms(const RunManifest& m, const std::vector<Paradigm>& paradigms) {
    const auto nets = manifest_networks(m);
    const auto scoring = scoring_params(m);
    const auto menu = m.config.chiplet_menu();
    std::vector<ParadigmResult> out;
    for (const auto p : paradigms) {
        ParadigmResult pr;
        pr.paradigm = p;
        std::size_t eco = 0;
        switch (p) {
            case Paradigm::HomogeneousAsicAll: {
                const auto refs = references(nets, scoring);
                double best = kInf;
                for (const auto& c : menu) {
                    const auto pool = ChipletPool::from({c});
                    auto ps = pool_score(pool, nets, refs, scoring);
                    if (ps.score < best) {
                        best = ps.score;
                        pr.designs = require_designs(ps, nets, pool);
                    }
                }
                if (!std::isfinite(best)) throw InfeasibleError("pool", "no single chiplet serves every network");
                eco = 1;
                break;
            }
            case Paradigm::HomogeneousNsic: {
                std::set<ChipletKey> chosen;
                for (const auto& n : nets) {
                    std::optional<GaResult> best;
                    for (const auto& c : menu) {
                        try {
                            auto r = best_network_design(ChipletPool::from({c}), n, scoring);
                            if (!best || r.design.objective < best->design.objective) best = std::move(r);
                        } catch (const InfeasibleError&) {
                        }
                    }
                    if (!best) throw InfeasibleError("pool", "no single chiplet serves '" + n.graph.name() + "'");
                    chosen.insert(best->design.stages.front().chiplet.design_key());
                    pr.designs.push_back(std::move(*best));
                }
                eco = chosen.size();
                break;
            }
            case Paradigm::HeterogeneousPool: {
                auto o = search_pool(m, nets, m.config.pool_budget);
                pr.designs = std::move(o.designs);
                eco = o.pool.members.size();
                break;
            }
            case Paradigm::HeterogeneousUnconstrained:
                pr.designs = menu_designs(m, nets);
                eco = used_chiplets(pr.designs);
                break;
        }
        for (std::size_t i = 0; i < nets.size(); ++i) {
            pr.ecosystem.push_back(eco);
            pr.metrics.push_back(
                metrics(pr.designs[i].design, metric_options(m, nets[i], pr.designs[i], eco, -1.0), m.config.model.cost));
        }
        out.push_back(std::move(pr));
    }
    return out;
}

Bundle cmd_compare(const RunManifest& m, const std::vector<Paradigm>& paradigms) {
    if (paradigms.empty()) throw ValidationError("no paradigms to compare");
    const auto nets = manifest_networks(m);
    const auto results = run_paradigms(m, paradigms);
    std::size_t base = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].paradigm == Paradigm::HomogeneousAsicAll) {
            base = i;
            break;
        }
    }
    auto values = [&](const ParadigmResult& r, std::size_t n) {
        const auto& ms = r.metrics[n];
        return std::array<double, 5>{r.designs[n].design.objective, ms.energy, ms.ec, ms.edp, ms.edpc};
    };
    std::string csv =
        "paradigm,network,objective,energy,ec,edp,edpc,norm_objective,norm_energy,norm_ec,norm_edp,norm_edpc\n";
    for (const auto& r : results) {
        std::array<double, 5> logsum{};
        for (std::size_t n = 0; n < nets.size(); ++n) {
            const auto v = values(r, n);
            const auto ref = values(results[base], n);
            csv += std::string(to_string(r.paradigm)) + "," + nets[n].graph.name();
            for (double x : v) csv += "," + num(x);
            for (std::size_t k = 0; k < v.size(); ++k) {
                csv += "," + num(v[k] / ref[k]);
                logsum[k] += std::log(v[k] / ref[k]);
            }
            csv += "\n";
        }
        csv += std::string(to_string(r.paradigm)) + ",geomean,,,,,";
        for (double l : logsum) csv += "," + num(std::exp(l / static_cast<double>(nets.size())));
        csv += "\n";
    }
    Bundle b;
    b["manifest.txt"] = dump_manifest(m);
    b["compare.csv"] = csv;

    const ParadigmResult* pool = nullptr;
    const ParadigmResult* free = nullptr;
    for (const auto& r : results) {
        if (r.paradigm == Paradigm::HeterogeneousPool) pool = &r;
        if (r.paradigm == Paradigm::HeterogeneousUnconstrained) free = &r;
    }
    if (pool && free) {
        std::string gap = "network,objective,energy,ec,edp,edpc\n";
        for (std::size_t n = 0; n < nets.size(); ++n) {
            gap += nets[n].graph.name();
            const auto a = values(*pool, n), c = values(*free, n);
            for (std::size_t k = 0; k < a.size(); ++k) gap += "," + num(a[k] / c[k]);
            gap += "\n";
        }
        b["gap.csv"] = gap;
    }
    return b;
}

Bundle cmd_cost(const RunManifest& m, const std::vector<double>& volumes) {
    const auto nets = manifest_networks(m);
    const auto outcome = search_pool(m, nets, m.config.pool_budget);
    const std::size_t shared = std::max<std::size_t>(1, used_chiplets(outcome.designs));
    std::size_t unique = 0;
    for (const auto& d : outcome.designs) unique += ecosystem_of({&d.design}).size();

    std::string csv = "strategy,network,volume,die,memory,package,nre,total\n";
    for (std::size_t i = 0; i < nets.size(); ++i) {
        const auto& d = outcome.designs[i].design;
        const double area = minimize_footprint(d, m.config.pnr).placement.area_mm2();
        for (const auto& [strategy, eco] : {std::pair<const char*, std::size_t>{"pool", shared},
                                            std::pair<const char*, std::size_t>{"per-network", unique}}) {
            for (double v : volumes) {
                auto params = m.config.model.cost;
                params.volume = v;
                const auto c = cost_breakdown(d, area, CostMode::Amortized, eco, params);
                csv += std::string(strategy) + "," + nets[i].graph.name() + "," + num(v) + "," + num(c.die) + "," +
                       num(c.memory) + "," + num(c.package) + "," + num(c.nre) + "," + num(c.total()) + "\n";
            }
        }
    }
    Bundle b;
    b["manifest.txt"] = dump_manifest(m);
    b["pool.csv"] = pool_csv(outcome.pool);
    b["cost.csv"] = csv;
    return b;
}

StageTable parse_stage_table(std::string_view csv) {
    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line) || line != "stage,t_cmp,e_dyn,p_static,dollar_cost") {
        throw ParseError("stage table must start with `stage,t_cmp,e_dyn,p_static,dollar_cost`");
    }
    StageTable table;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        const std::string ctx = "stage table line " + std::to_string(lineno);
        if (f.size() != 5) throw ParseError(ctx + ": expected 5 fields");
        const auto stage = parse_int(f[0], ctx);
        if (stage < 0 || static_cast<std::size_t>(stage) > table.size()) {
            throw ParseError(ctx + ": stages must be numbered 0, 1, ... in order");
        }
        if (static_cast<std::size_t>(stage) == table.size()) table.emplace_back();
        StageCandidate c;
        c.group_index = static_cast<std::size_t>(stage);
        c.t_cmp = parse_double(f[1], ctx);
        c.e_dyn = parse_double(f[2], ctx);
        c.p_static = parse_double(f[3], ctx);
        c.dollar_cost = parse_double(f[4], ctx);
        if (!(c.t_cmp > 0.0) || c.e_dyn < 0.0 || c.p_static < 0.0 || c.dollar_cost < 0.0) {
            throw ValidationError(ctx + ": t_cmp must be positive, the rest non-negative");
        }
        table.back().push_back(c);
    }
    if (table.empty()) throw ValidationError("stage table is empty");
    return table;
}

Bundle cmd_solve_stages(const StageTable& table, StageSolver solver, Objective objective, const LatencyCap& cap) {
    OpCounter counter;
    const auto d = solve_stages(solver, table, objective, cap, &counter);
    std::string csv = "stage,choice,t_cmp,e_dyn,p_static,dollar_cost\n";
    for (std::size_t i = 0; i < d.stages.size(); ++i) {
        const auto& s = d.stages[i];
        csv += std::to_string(i) + "," + std::to_string(d.choice[i]) + "," + num(s.t_cmp) + "," + num(s.e_dyn) +
               "," + num(s.p_static) + "," + num(s.dollar_cost) + "\n";
    }
    Bundle b;
    b["solve.csv"] = csv;
    b["summary.csv"] = "objective,period,comparisons,evaluations,tuples\n" + num(d.objective) + "," + num(d.period) +
                       "," + std::to_string(counter.comparisons) + "," + std::to_string(counter.evaluations) + "," +
                       std::to_string(counter.tuples) + "\n";
    return b;
}

Bundle cmd_simulate(const RunManifest& m, bool trace) {
    auto nets = manifest_networks(m);
    // The simulator runs one batch size throughout.
    for (auto& n : nets) n.batches = {n.batches.front()};
    const auto designs = menu_designs(m, nets);
    std::string csv =
        "network,bus,stages,analytical_period,sim_period,period_rel_err,analytical_first_output,sim_first_output,"
        "first_output_rel_err,total_time,energy\n";
    std::string stages = "network,bus,stage,busy,idle,tiles\n";
    Bundle b;
    for (std::size_t i = 0; i < nets.size(); ++i) {
        const auto& d = designs[i].design;
        const auto& name = nets[i].graph.name();
        std::vector<std::pair<std::string, std::vector<int>>> layouts = {{"private", {}}};
        if (m.config.sim.shared_bus) layouts.emplace_back("shared", std::vector<int>(d.stages.size(), 0));
        for (const auto& [bus, map] : layouts) {
            SimConfig cfg;
            cfg.design = d;
            cfg.inputs = m.config.sim.inputs;
            cfg.bus_map = map;
            cfg.tile_bytes = m.config.sim.tile_bytes;
            cfg.buffer_slots = m.config.sim.buffer_slots;
            cfg.trace = trace;
            const auto r = simulate(cfg);
            const double ap = analytical_period(d), af = analytical_first_output(d);
            csv += name + "," + bus + "," + std::to_string(d.stages.size()) + "," + num(ap) + "," + num(r.period) +
                   "," + num(std::abs(r.period - ap) / ap) + "," + num(af) + "," + num(r.first_output_latency) + "," +
                   num(std::abs(r.first_output_latency - af) / af) + "," + num(r.total_time) + "," + num(r.energy) +
                   "\n";
            for (std::size_t s = 0; s < d.stages.size(); ++s) {
                stages += name + "," + bus + "," + std::to_string(s) + "," + num(r.busy[s]) + "," + num(r.idle[s]) +
                          "," + std::to_string(r.tiles[s]) + "\n";
            }
            if (trace) b["traces/" + name + "_" + bus + ".csv"] = r.trace_csv;
        }
    }
    b["manifest.txt"] = dump_manifest(m);
    b["designs.csv"] = designs_csv(nets, designs);
    b["sim.csv"] = csv;
    b["sim_stages.csv"] = stages;
    return b;
}

Bundle cmd_pnr(const RunManifest& m, bool dump) {
    const auto nets = manifest_networks(m);
    const auto designs = menu_designs(m, nets);
    std::string csv = "network,chiplets,side,interposer_mm2,chiplet_mm2,route_length,probes\n";
    Bundle b;
    for (std::size_t i = 0; i < nets.size(); ++i) {
        const auto fp = minimize_footprint(designs[i].design, m.config.pnr);
        const auto problems = validate_placement(fp.placement);
        if (!problems.empty()) throw std::logic_error("layout validation failed: " + problems[0]);
        std::size_t length = 0;
        for (const auto& r : fp.placement.routes) length += r.length();
        const auto& name = nets[i].graph.name();
        csv += name + "," + std::to_string(fp.placement.rects.size()) + "," + std::to_string(fp.side) + "," +
               num(fp.placement.area_mm2()) + "," + num(total_chiplet_area(designs[i].design)) + "," +
               std::to_string(length) + "," + std::to_string(fp.probes) + "\n";
        if (dump) {
            b["layouts/" + name + ".txt"] = ascii_dump(fp.placement);
            b["layouts/" + name + ".json"] = json_dump(fp.placement);
        }
    }
    b["manifest.txt"] = dump_manifest(m);
    b["pnr.csv"] = csv;
    return b;
}

}  // namespace chipdse
