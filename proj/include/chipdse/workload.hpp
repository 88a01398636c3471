#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "chipdse/hardware.hpp"
#include "chipdse/types.hpp"

namespace chipdse {

/// Loop bounds recognised per kind (all must be >= 1):
///   conv            n k c r s p q [stride]
///   depthwise-conv  n c r s p q [stride]
///   matmul          m k n
///   attention-*     h l s d   (heads, query len, key/value len, head dim)
///   elementwise     e [arity]
///   normalization   e c
/// Elementwise additionally takes `ops` (arithmetic ops per element, may be 0).
struct OperatorNode {
    std::string id;
    OpKind kind = OpKind::MatMul;
    std::map<std::string, std::int64_t> dims;
    int bytes_per_element = 2;
    BatchClass batch_class = BatchClass::Sensitive;
    std::int64_t repeat = 1;
    std::int64_t ops_per_element = 1;

    std::int64_t dim(const std::string& name) const;
    std::int64_t dim_or(const std::string& name, std::int64_t fallback) const;
};

BatchClass default_batch_class(OpKind kind);

struct Edge {
    std::size_t src = 0;
    std::size_t dst = 0;
    std::int64_t bytes = 0;  // per sample
};

/// Operators in a validated topological order plus producer->consumer edges.
class OperatorGraph {
public:
    OperatorGraph() = default;
    OperatorGraph(std::string name, std::vector<OperatorNode> nodes, std::vector<Edge> edges);

    const std::string& name() const { return name_; }
    const std::vector<OperatorNode>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t size() const { return nodes_.size(); }
    const OperatorNode& node(std::size_t i) const { return nodes_.at(i); }
    std::size_t index_of(std::string_view id) const;

private:
    std::string name_;
    std::vector<OperatorNode> nodes_;
    std::vector<Edge> edges_;
};

struct WorkloadStats {
    std::int64_t flops = 0;
    std::int64_t weight_bytes = 0;
    std::int64_t input_bytes = 0;
    std::int64_t output_bytes = 0;
    std::int64_t cache_bytes = 0;  // part of the inputs held in memory per sample (attention K or V)

    std::int64_t offchip_bytes() const { return weight_bytes + input_bytes + output_bytes; }
    double arithmetic_intensity() const;
};

OperatorGraph parse_network(std::string_view text, std::string name = "network");
OperatorGraph load_network(const std::filesystem::path& path);

/// Footprint of one instance of `op` (repeat not applied) when `batch` samples
/// are processed together. Weights are fetched once per batch.
WorkloadStats operator_footprint(const OperatorNode& op, std::int64_t batch);

BoundClass classify_boundedness(const WorkloadStats& stats, const ChipletConfig& chiplet,
                                const MemoryModule& memory);

struct BatchPoint {
    std::int64_t batch = 1;
    double latency = 0.0;     // seconds for the whole batch
    double throughput = 0.0;  // samples per second
};

std::vector<BatchPoint> batch_response(const OperatorNode& op, const ChipletConfig& chiplet,
                                       const MemoryModule& memory,
                                       const std::vector<std::int64_t>& batches,
                                       const AffinityTable& affinity = AffinityTable{});

}  // namespace chipdse
