#include "chipdse/types.hpp"

#include <array>
#include <string>

namespace chipdse {

namespace {

constexpr std::array<std::string_view, kNumOpKinds> kOpKindNames = {
    "conv", "depthwise-conv", "matmul", "attention-score",
    "attention-context", "elementwise", "normalization"};

constexpr std::array<std::string_view, kNumDataflows> kDataflowNames = {"RS", "OS", "WS"};

constexpr std::array<std::string_view, kNumMemoryKinds> kMemoryNames = {"LPDDR5", "DDR5", "GDDR7",
                                                                        "HBM3"};

constexpr std::array<std::string_view, 4> kObjectiveNames = {"energy", "ec", "edp", "edpc"};

template <typename Enum, std::size_t N>
Enum lookup(std::string_view text, const std::array<std::string_view, N>& names,
            std::string_view what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == text) return static_cast<Enum>(i);
    }
    throw ParseError("unknown " + std::string(what) + " '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(OpKind kind) { return kOpKindNames.at(static_cast<std::size_t>(kind)); }

std::string_view to_string(BatchClass cls) {
    return cls == BatchClass::Agnostic ? "batch-agnostic" : "batch-sensitive";
}

std::string_view to_string(BoundClass cls) {
    return cls == BoundClass::ComputeBound ? "compute-bound" : "memory-bound";
}

std::string_view to_string(Dataflow df) { return kDataflowNames.at(static_cast<std::size_t>(df)); }

std::string_view to_string(MemoryKind kind) {
    return kMemoryNames.at(static_cast<std::size_t>(kind));
}

std::string_view to_string(Objective obj) {
    return kObjectiveNames.at(static_cast<std::size_t>(obj));
}

OpKind parse_op_kind(std::string_view text) {
    return lookup<OpKind>(text, kOpKindNames, "operator kind");
}

Dataflow parse_dataflow(std::string_view text) {
    return lookup<Dataflow>(text, kDataflowNames, "dataflow");
}

MemoryKind parse_memory_kind(std::string_view text) {
    return lookup<MemoryKind>(text, kMemoryNames, "memory kind");
}

Objective parse_objective(std::string_view text) {
    return lookup<Objective>(text, kObjectiveNames, "objective");
}

}  // namespace chipdse
