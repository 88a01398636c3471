#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "chipdse/ga.hpp"

namespace chipdse {

enum class ScenarioKind { Chatbot, Summarization, SpecDecode, AvPerception };
ScenarioKind parse_scenario_kind(std::string_view text);
std::string_view to_string(ScenarioKind kind);

/// E2E: one sample's trip through the pipeline is capped. Period: the
/// batch period is capped.
enum class LatencyMode { EndToEnd, Period };

struct ScenarioGraph {
    std::string role;  // prefill, decode, draft, target or vision
    OperatorGraph graph;
    LatencyMode mode = LatencyMode::EndToEnd;
    LatencyConstraints limits;
    std::vector<std::int64_t> batches = {1};
};

struct SpecDecodeConfig {
    int k = 5;               // draft tokens per iteration
    double tar = 5.6;        // expected tokens per iteration, bonus token included
    double speedup_cap = 2.0;
    void validate() const;
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::Chatbot;
    std::vector<ScenarioGraph> graphs;
    std::optional<double> ttft, tpot, e2e;
    SpecDecodeConfig spec;
};

struct ScenarioParams {
    double av_deadline = 0.033;
    std::vector<std::int64_t> decode_batches = {1, 2, 4, 8};
    double spec_tpot = 0.15;  // target decode limit for speculative decoding
    SpecDecodeConfig spec;
};

/// Graph roles by position: chatbot and summarization take (prefill,
/// decode); spec-decode takes (draft, target); av-perception takes (vision).
Scenario build_scenario(ScenarioKind kind, std::vector<OperatorGraph> graphs, const ScenarioParams& params = {});

struct ConstraintCheck {
    std::string graph;       // role
    std::string constraint;  // ttft, tpot or e2e
    double limit = 0.0;
    double value = 0.0;
    double slack = 0.0;      // limit - value
    bool pass = false;
};

struct Verdict {
    bool pass = true;
    std::vector<ConstraintCheck> checks;
};

/// A solved graph: its design plus the batch each stage runs.
struct ScenarioDesign {
    AcceleratorDesign design;
    std::vector<std::int64_t> stage_batches;
};

/// Prefill and vision graphs are checked as E2E factor x T against their
/// limit, decode graphs as period factor x T. Inclusive comparisons.
Verdict check_constraints(const std::vector<ScenarioDesign>& designs, const Scenario& scenario);

/// Runs the fusion search on every graph of the scenario under its limits.
std::vector<GaResult> solve_scenario(const Scenario& scenario, const DesignSpace& base, Objective objective,
                                     const GaParams& ga, bool exhaustive = false);

struct BatchPlan {
    AcceleratorDesign design;
    std::vector<FusionGroup> groups;
    std::vector<std::int64_t> stage_batches;
    std::vector<double> boundary_buffer_bytes;  // per stage boundary, regrouping buffer
    double objective = std::numeric_limits<double>::infinity();
};

/// Per-stage batches over fixed groups. Loops over the largest batch in the
/// plan so the period cap is exact, offering every smaller batch to each
/// stage. Only period limits apply.
BatchPlan nonuniform_batch_search(const OperatorGraph& graph, const std::vector<FusionGroup>& groups,
                                  const DesignSpace& space, Objective objective, const LatencyConstraints& limits);

/// Best plan where every stage runs the same batch.
BatchPlan uniform_batch_search(const OperatorGraph& graph, const std::vector<FusionGroup>& groups,
                               const DesignSpace& space, Objective objective, const LatencyConstraints& limits);

/// Timing and energy of the two paths of speculative decoding.
struct SpecDecodeTimes {
    double t_draft = 0.0;         // one draft token
    double e_draft_step = 0.0;
    double t_verify = 0.0;        // one target pass over k tokens
    double e_verify = 0.0;
    double t_target_token = 0.0;  // target alone, per token
};

struct SpecDecodeResult {
    double tokens_per_iteration = 0.0;
    double iteration_time = 0.0;
    double raw_speedup = 0.0;
    double speedup = 0.0;         // capped
    double energy_per_token = 0.0;
};

/// Throws InfeasibleError("spec-decode", ...) when the draft runs slower than
/// T_target / k.
SpecDecodeResult spec_decode_eval(const SpecDecodeTimes& times, const SpecDecodeConfig& cfg);

/// Steps through `iterations` draft/verify rounds accepting exactly the
/// scalar token count each round.
SpecDecodeResult spec_decode_iterate(const SpecDecodeTimes& times, const SpecDecodeConfig& cfg, int iterations);

/// Per-token acceptance probability whose accept-until-reject chain (plus
/// the bonus token) yields `tar` tokens per iteration on average.
double acceptance_probability(double tar, int k);

/// Accept-until-reject sensitivity run with a seeded generator.
SpecDecodeResult spec_decode_bernoulli(const SpecDecodeTimes& times, const SpecDecodeConfig& cfg, int iterations,
                                       std::uint64_t seed);

/// Per-token draft timing from a batch-1 decode design, and a verify pass
/// built by re-running the target's stages at batch k.
SpecDecodeTimes spec_decode_times(const AcceleratorDesign& draft, const AcceleratorDesign& target,
                                  const OperatorGraph& target_graph, int k, const ModelParams& model = {});

}  // namespace chipdse
