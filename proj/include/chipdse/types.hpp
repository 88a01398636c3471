#pragma once

#include <stdexcept>
#include <string_view>

namespace chipdse {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a search finds no design satisfying feasibility or latency
/// constraints. `layer` names the stage of the flow that gave up.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(std::string_view layer, const std::string& what)
        : std::runtime_error(what), layer_(layer) {}
    const std::string& layer() const { return layer_; }

private:
    std::string layer_;
};

enum class OpKind {
    Conv,
    DepthwiseConv,
    MatMul,
    AttentionScore,
    AttentionContext,
    Elementwise,
    Normalization,
};
inline constexpr int kNumOpKinds = 7;

enum class BatchClass { Agnostic, Sensitive };

enum class BoundClass { ComputeBound, MemoryBound };

enum class Dataflow { RS, OS, WS };
inline constexpr int kNumDataflows = 3;

enum class MemoryKind { LPDDR5, DDR5, GDDR7, HBM3 };
inline constexpr int kNumMemoryKinds = 4;

enum class Objective { Energy, EC, EDP, EDPC };

std::string_view to_string(OpKind kind);
std::string_view to_string(BatchClass cls);
std::string_view to_string(BoundClass cls);
std::string_view to_string(Dataflow df);
std::string_view to_string(MemoryKind kind);
std::string_view to_string(Objective obj);

OpKind parse_op_kind(std::string_view text);
Dataflow parse_dataflow(std::string_view text);
MemoryKind parse_memory_kind(std::string_view text);
Objective parse_objective(std::string_view text);

inline bool is_cost_aware(Objective obj) { return obj == Objective::EC || obj == Objective::EDPC; }
inline bool is_delay_aware(Objective obj) { return obj == Objective::EDP || obj == Objective::EDPC; }

}  // namespace chipdse
