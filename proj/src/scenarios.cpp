#include "chipdse/scenarios.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace chipdse {

namespace {

constexpr std::array<std::string_view, 4> kScenarioNames = {"chatbot", "summarization", "spec-decode",
                                                            "av-perception"};

double design_energy(const AcceleratorDesign& d) {
    double e = 0.0;
    for (const auto& s : d.stages) e += stage_energy_at(s, d.period);
    return e;
}

std::vector<std::int64_t> stage_batches_of(const AcceleratorDesign& d) {
    std::vector<std::int64_t> b;
    for (const auto& s : d.stages) b.push_back(s.batch);
    return b;
}

std::vector<double> boundary_buffers(const OperatorGraph& graph, const std::vector<FusionGroup>& groups,
                                     const std::vector<std::int64_t>& batches) {
    std::vector<double> out;
    for (std::size_t s = 0; s + 1 < groups.size(); ++s) {
        double tensor = 0.0;
        for (const auto& e : graph.edges()) {
            if (e.src < groups[s].end && e.dst >= groups[s].end) tensor += static_cast<double>(e.bytes);
        }
        const auto hi = std::max(batches[s], batches[s + 1]);
        const auto lo = std::min(batches[s], batches[s + 1]);
        out.push_back(tensor * static_cast<double>(hi) / static_cast<double>(lo));
    }
    return out;
}

BatchPlan batch_plan(const OperatorGraph& graph, const std::vector<FusionGroup>& groups, const DesignSpace& space,
                     Objective objective, const LatencyConstraints& limits, bool uniform) {
    if (groups.empty()) throw ValidationError("batch search needs at least one group");
    if (std::isfinite(limits.max_e2e)) {
        throw ValidationError("per-stage batching applies to period-limited graphs only");
    }
    auto menu = space.batches;
    std::sort(menu.begin(), menu.end());
    menu.erase(std::unique(menu.begin(), menu.end()), menu.end());
    if (menu.empty() || menu.front() < 1) throw ValidationError("batch menu must hold positive batches");

    std::vector<GroupProfile> profiles;
    for (const auto& g : groups) profiles.push_back(profile_group(graph, g));

    BatchPlan best;
    bool mappable = false;
    for (const auto bmax : menu) {
        CandidateMenus menus;
        menus.memories = space.memories;
        menus.tps = space.tps;
        if (uniform) {
            menus.batches = {bmax};
        } else {
            for (auto b : menu) {
                if (b <= bmax) menus.batches.push_back(b);
            }
        }
        StageTable table;
        for (const auto& p : profiles) table.push_back(enumerate_candidates(p, space.pool, menus, space.model));
        if (std::any_of(table.begin(), table.end(), [](const auto& t) { return t.empty(); })) continue;
        mappable = true;
        LatencyCap cap;
        cap.max_period = limits.max_period;
        cap.period_factor = static_cast<double>(bmax);
        try {
            auto d = cht_search(table, objective, cap);
            if (d.objective < best.objective) {
                best.objective = d.objective;
                best.design = std::move(d);
            }
        } catch (const InfeasibleError&) {
        }
    }
    if (!mappable) throw InfeasibleError("fusion", "a group of '" + graph.name() + "' fits no pool chiplet");
    if (!std::isfinite(best.objective)) {
        throw InfeasibleError("latency-constraint",
                              "no batch plan for '" + graph.name() + "' meets the latency constraints");
    }
    best.groups = groups;
    best.stage_batches = stage_batches_of(best.design);
    best.boundary_buffer_bytes = boundary_buffers(graph, groups, best.stage_batches);
    return best;
}

}  // namespace

ScenarioKind parse_scenario_kind(std::string_view text) {
    for (std::size_t i = 0; i < kScenarioNames.size(); ++i) {
        if (kScenarioNames[i] == text) return static_cast<ScenarioKind>(i);
    }
    throw ValidationError("unknown scenario '" + std::string(text) + "'");
}

std::string_view to_string(ScenarioKind kind) { return kScenarioNames.at(static_cast<std::size_t>(kind)); }

void SpecDecodeConfig::validate() const {
    if (k < 5) throw ValidationError("speculative decoding needs k >= 5");
    if (!(tar >= 1.0)) throw ValidationError("token acceptance rate must be at least 1");
    if (!(speedup_cap > 0.0)) throw ValidationError("speedup cap must be positive");
}

Scenario build_scenario(ScenarioKind kind, std::vector<OperatorGraph> graphs, const ScenarioParams& params) {
    Scenario sc;
    sc.kind = kind;
    auto expect = [&](std::size_t n) {
        if (graphs.size() != n) {
            throw ValidationError("scenario '" + std::string(to_string(kind)) + "' takes " + std::to_string(n) +
                                  " graph(s), got " + std::to_string(graphs.size()));
        }
    };
    auto serving = [&](double ttft, double tpot) {
        expect(2);
        sc.ttft = ttft;
        sc.tpot = tpot;
        ScenarioGraph prefill{"prefill", std::move(graphs[0]), LatencyMode::EndToEnd, {}, {1}};
        prefill.limits.max_e2e = ttft;
        ScenarioGraph decode{"decode", std::move(graphs[1]), LatencyMode::Period, {}, params.decode_batches};
        decode.limits.max_period = tpot;
        sc.graphs = {std::move(prefill), std::move(decode)};
    };
    switch (kind) {
        case ScenarioKind::Chatbot:
            serving(2.5, 0.15);
            break;
        case ScenarioKind::Summarization:
            serving(15.0, 0.15);
            break;
        case ScenarioKind::AvPerception: {
            expect(1);
            if (!(params.av_deadline > 0.0)) throw ValidationError("deadline must be positive");
            sc.e2e = params.av_deadline;
            ScenarioGraph vision{"vision", std::move(graphs[0]), LatencyMode::EndToEnd, {}, {1}};
            vision.limits.max_e2e = params.av_deadline;
            sc.graphs = {std::move(vision)};
            break;
        }
        case ScenarioKind::SpecDecode: {
            expect(2);
            params.spec.validate();
            sc.spec = params.spec;
            sc.tpot = params.spec_tpot;
            // The draft is latency-critical and runs alone; the target decode
            // keeps the serving limit.
            ScenarioGraph draft{"draft", std::move(graphs[0]), LatencyMode::Period, {}, {1}};
            ScenarioGraph target{"target", std::move(graphs[1]), LatencyMode::Period, {}, {1}};
            target.limits.max_period = params.spec_tpot;
            sc.graphs = {std::move(draft), std::move(target)};
            break;
        }
    }
    return sc;
}

Verdict check_constraints(const std::vector<ScenarioDesign>& designs, const Scenario& scenario) {
    if (designs.size() != scenario.graphs.size()) throw ValidationError("one design per scenario graph is required");
    Verdict v;
    for (std::size_t i = 0; i < designs.size(); ++i) {
        const auto& g = scenario.graphs[i];
        const auto& d = designs[i];
        if (!d.design.feasible() || d.stage_batches.size() != d.design.stages.size()) {
            throw ValidationError("design for '" + g.role + "' is not evaluated");
        }
        ConstraintCheck c;
        c.graph = g.role;
        if (g.mode == LatencyMode::EndToEnd) {
            c.constraint = g.role == "prefill" ? "ttft" : "e2e";
            c.limit = g.limits.max_e2e;
            c.value = d.design.period * e2e_factor(d.stage_batches);
        } else {
            c.constraint = "tpot";
            c.limit = g.limits.max_period;
            c.value = d.design.period * period_factor(d.stage_batches);
        }
        if (!std::isfinite(c.limit)) continue;
        c.slack = c.limit - c.value;
        c.pass = c.value <= c.limit;
        v.pass = v.pass && c.pass;
        v.checks.push_back(c);
    }
    return v;
}

std::vector<GaResult> solve_scenario(const Scenario& scenario, const DesignSpace& base, Objective objective,
                                     const GaParams& ga, bool exhaustive) {
    std::vector<GaResult> out;
    for (const auto& g : scenario.graphs) {
        DesignSpace space = base;
        space.batches = g.batches;
        out.push_back(exhaustive ? exhaustive_fusion_search(g.graph, space, objective, g.limits)
                                 : ga_search(g.graph, space, objective, g.limits, ga));
    }
    return out;
}

BatchPlan nonuniform_batch_search(const OperatorGraph& graph, const std::vector<FusionGroup>& groups,
                                  const DesignSpace& space, Objective objective, const LatencyConstraints& limits) {
    return batch_plan(graph, groups, space, objective, limits, false);
}

BatchPlan uniform_batch_search(const OperatorGraph& graph, const std::vector<FusionGroup>& groups,
                               const DesignSpace& space, Objective objective, const LatencyConstraints& limits) {
    return batch_plan(graph, groups, space, objective, limits, true);
}

SpecDecodeResult spec_decode_eval(const SpecDecodeTimes& t, const SpecDecodeConfig& cfg) {
    cfg.validate();
    if (!(t.t_target_token > 0.0) || !(t.t_verify > 0.0) || t.t_draft < 0.0) {
        throw ValidationError("speculative decoding times must be positive");
    }
    if (t.t_draft * cfg.k > t.t_target_token) {
        throw InfeasibleError("spec-decode", "draft token time exceeds the target token time divided by k");
    }
    SpecDecodeResult r;
    r.tokens_per_iteration = std::min(cfg.tar, static_cast<double>(cfg.k + 1));
    r.iteration_time = cfg.k * t.t_draft + t.t_verify;
    r.raw_speedup = r.tokens_per_iteration * t.t_target_token / r.iteration_time;
    r.speedup = std::min(r.raw_speedup, cfg.speedup_cap);
    r.energy_per_token = (cfg.k * t.e_draft_step + t.e_verify) / r.tokens_per_iteration;
    return r;
}

SpecDecodeResult spec_decode_iterate(const SpecDecodeTimes& t, const SpecDecodeConfig& cfg, int iterations) {
    cfg.validate();
    if (iterations < 1) throw ValidationError("need at least one iteration");
    const double accepted = std::min(cfg.tar, static_cast<double>(cfg.k + 1));
    double time = 0.0, energy = 0.0, tokens = 0.0;
    for (int it = 0; it < iterations; ++it) {
        for (int step = 0; step < cfg.k; ++step) {
            time += t.t_draft;
            energy += t.e_draft_step;
        }
        time += t.t_verify;
        energy += t.e_verify;
        tokens += accepted;
    }
    SpecDecodeResult r;
    r.tokens_per_iteration = tokens / iterations;
    r.iteration_time = time / iterations;
    r.raw_speedup = tokens * t.t_target_token / time;
    r.speedup = std::min(r.raw_speedup, cfg.speedup_cap);
    r.energy_per_token = energy / tokens;
    return r;
}

double acceptance_probability(double tar, int k) {
    if (k < 1) throw ValidationError("k must be positive");
    const double top = static_cast<double>(k + 1);
    if (!(tar >= 1.0 && tar <= top)) throw ValidationError("TAR must lie in [1, k + 1]");
    // Expected tokens = 1 + a + ... + a^k, increasing in a.
    auto expected = [&](double a) {
        double s = 0.0, p = 1.0;
        for (int i = 0; i <= k; ++i) {
            s += p;
            p *= a;
        }
        return s;
    };
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (expected(mid) < tar ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SpecDecodeResult spec_decode_bernoulli(const SpecDecodeTimes& t, const SpecDecodeConfig& cfg, int iterations,
                                       std::uint64_t seed) {
    cfg.validate();
    if (iterations < 1) throw ValidationError("need at least one iteration");
    const double a = acceptance_probability(std::min(cfg.tar, static_cast<double>(cfg.k + 1)), cfg.k);
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution accept(a);
    double time = 0.0, energy = 0.0, tokens = 0.0;
    for (int it = 0; it < iterations; ++it) {
        time += cfg.k * t.t_draft + t.t_verify;
        energy += cfg.k * t.e_draft_step + t.e_verify;
        int n = 0;
        while (n < cfg.k && accept(rng)) ++n;
        tokens += n + 1;
    }
    SpecDecodeResult r;
    r.tokens_per_iteration = tokens / iterations;
    r.iteration_time = time / iterations;
    r.raw_speedup = tokens * t.t_target_token / time;
    r.speedup = std::min(r.raw_speedup, cfg.speedup_cap);
    r.energy_per_token = energy / tokens;
    return r;
}

SpecDecodeTimes spec_decode_times(const AcceleratorDesign& draft, const AcceleratorDesign& target,
                                  const OperatorGraph& target_graph, int k, const ModelParams& model) {
    if (!draft.feasible() || !target.feasible()) throw ValidationError("spec-decode needs evaluated designs");
    if (k < 1) throw ValidationError("k must be positive");
    SpecDecodeTimes t;
    t.t_draft = draft.period * period_factor(stage_batches_of(draft));
    t.e_draft_step = design_energy(draft);
    t.t_target_token = target.period * period_factor(stage_batches_of(target));

    // Verification pushes k tokens through the target as one batch.
    std::vector<StageCandidate> verify;
    double tk = 0.0;
    for (const auto& s : target.stages) {
        auto c = candidate_eval(profile_group(target_graph, s.range), s.chiplet, s.memory, k, s.tp, model);
        if (!c) throw InfeasibleError("spec-decode", "target stage does not map at batch k");
        tk = std::max(tk, c->t_cmp);
        verify.push_back(*c);
    }
    t.t_verify = static_cast<double>(k) * tk;
    for (const auto& c : verify) t.e_verify += static_cast<double>(k) * stage_energy_at(c, tk);
    return t;
}

}  // namespace chipdse
