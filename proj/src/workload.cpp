#include "chipdse/workload.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <unordered_map>

#include "chipdse/records.hpp"

namespace chipdse {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) {
        throw ValidationError("operator footprint overflows 64-bit range");
    }
    return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) {
        throw ValidationError("operator footprint overflows 64-bit range");
    }
    return out;
}

std::int64_t product(std::initializer_list<std::int64_t> xs) {
    std::int64_t p = 1;
    for (auto x : xs) p = checked_mul(p, x);
    return p;
}

struct KindSchema {
    std::vector<std::string> required;
    std::vector<std::string> optional;
};

const KindSchema& schema_for(OpKind kind) {
    static const std::unordered_map<int, KindSchema> schemas = {
        {static_cast<int>(OpKind::Conv), {{"n", "k", "c", "r", "s", "p", "q"}, {"stride"}}},
        {static_cast<int>(OpKind::DepthwiseConv), {{"n", "c", "r", "s", "p", "q"}, {"stride"}}},
        {static_cast<int>(OpKind::MatMul), {{"m", "k", "n"}, {}}},
        {static_cast<int>(OpKind::AttentionScore), {{"h", "l", "s", "d"}, {}}},
        {static_cast<int>(OpKind::AttentionContext), {{"h", "l", "s", "d"}, {}}},
        {static_cast<int>(OpKind::Elementwise), {{"e"}, {"arity"}}},
        {static_cast<int>(OpKind::Normalization), {{"e", "c"}, {}}},
    };
    return schemas.at(static_cast<int>(kind));
}

}  // namespace

std::int64_t OperatorNode::dim(const std::string& name) const {
    auto it = dims.find(name);
    if (it == dims.end()) throw ValidationError("operator '" + id + "' lacks loop bound '" + name + "'");
    return it->second;
}

std::int64_t OperatorNode::dim_or(const std::string& name, std::int64_t fallback) const {
    auto it = dims.find(name);
    return it == dims.end() ? fallback : it->second;
}

BatchClass default_batch_class(OpKind kind) {
    switch (kind) {
        case OpKind::AttentionScore:
        case OpKind::AttentionContext:
        case OpKind::Elementwise:
            return BatchClass::Agnostic;
        default:
            return BatchClass::Sensitive;
    }
}

double WorkloadStats::arithmetic_intensity() const {
    const auto bytes = offchip_bytes();
    if (bytes == 0) return 0.0;
    return static_cast<double>(flops) / static_cast<double>(bytes);
}

OperatorGraph::OperatorGraph(std::string name, std::vector<OperatorNode> nodes,
                             std::vector<Edge> edges)
    : name_(std::move(name)), nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::set<std::string> ids;
    for (const auto& n : nodes_) {
        if (!ids.insert(n.id).second) throw ValidationError("duplicate node id '" + n.id + "'");
        if (n.repeat < 1) throw ValidationError("node '" + n.id + "': repeat must be >= 1");
        if (n.bytes_per_element < 1) {
            throw ValidationError("node '" + n.id + "': bytes per element must be >= 1");
        }
        for (const auto& key : schema_for(n.kind).required) {
            if (!n.dims.count(key)) {
                throw ValidationError("node '" + n.id + "': missing loop bound '" + key + "'");
            }
        }
        for (const auto& [key, value] : n.dims) {
            if (value < 1) {
                throw ValidationError("node '" + n.id + "': loop bound '" + key + "' must be >= 1");
            }
        }
        if (n.ops_per_element < 0) throw ValidationError("node '" + n.id + "': ops must be >= 0");
    }
    for (const auto& e : edges_) {
        if (e.src >= nodes_.size() || e.dst >= nodes_.size()) {
            throw ValidationError("edge references a missing node");
        }
        if (e.bytes <= 0) throw ValidationError("edge byte size must be > 0");
        if (e.src >= e.dst) {
            throw ValidationError("edge " + nodes_[e.src].id + " -> " + nodes_[e.dst].id +
                                  " violates topological order");
        }
    }
}

std::size_t OperatorGraph::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id == id) return i;
    }
    throw ValidationError("unknown node id '" + std::string(id) + "'");
}

OperatorGraph parse_network(std::string_view text, std::string name) {
    std::vector<OperatorNode> nodes;
    struct RawEdge {
        std::string src, dst;
        std::int64_t bytes;
        int line;
    };
    std::vector<RawEdge> raw_edges;

    for (const auto& rec : parse_records(text)) {
        if (rec.keyword == "network") {
            if (rec.positional.size() != 1 || !rec.values.empty()) {
                throw ParseError(rec.where() + ": expected `network <name>`");
            }
            name = rec.positional[0];
        } else if (rec.keyword == "node") {
            if (rec.positional.size() != 2) {
                throw ParseError(rec.where() + ": expected `node <id> <kind> key=value...`");
            }
            OperatorNode n;
            n.id = rec.positional[0];
            n.kind = parse_op_kind(rec.positional[1]);
            const auto& schema = schema_for(n.kind);
            std::set<std::string> allowed(schema.required.begin(), schema.required.end());
            allowed.insert(schema.optional.begin(), schema.optional.end());
            allowed.insert({"bpe", "repeat", "batch_class"});
            if (n.kind == OpKind::Elementwise) allowed.insert("ops");
            rec.require_keys_within(allowed);
            for (const auto& key : schema.required) n.dims[key] = rec.integer(key);
            for (const auto& key : schema.optional) {
                if (rec.has(key)) n.dims[key] = rec.integer(key);
            }
            n.bytes_per_element = static_cast<int>(rec.integer_or("bpe", 2));
            n.repeat = rec.integer_or("repeat", 1);
            n.ops_per_element = rec.integer_or("ops", 1);
            n.batch_class = default_batch_class(n.kind);
            if (rec.has("batch_class")) {
                const auto& cls = rec.str("batch_class");
                if (cls == "agnostic") {
                    n.batch_class = BatchClass::Agnostic;
                } else if (cls == "sensitive") {
                    n.batch_class = BatchClass::Sensitive;
                } else {
                    throw ParseError(rec.where() + ": batch_class must be agnostic|sensitive");
                }
            }
            nodes.push_back(std::move(n));
        } else if (rec.keyword == "edge") {
            if (rec.positional.size() != 2) {
                throw ParseError(rec.where() + ": expected `edge <src> <dst> bytes=<n>`");
            }
            rec.require_keys_within({"bytes"});
            raw_edges.push_back({rec.positional[0], rec.positional[1], rec.integer("bytes"), rec.line});
        } else {
            throw ParseError(rec.where() + ": unknown record '" + rec.keyword + "'");
        }
    }

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!index.emplace(nodes[i].id, i).second) {
            throw ValidationError("duplicate node id '" + nodes[i].id + "'");
        }
    }

    std::vector<std::vector<std::size_t>> succ(nodes.size());
    std::vector<int> indeg(nodes.size(), 0);
    for (const auto& e : raw_edges) {
        auto s = index.find(e.src);
        auto d = index.find(e.dst);
        if (s == index.end() || d == index.end()) {
            throw ValidationError("line " + std::to_string(e.line) + ": edge " + e.src + " -> " +
                                  e.dst + " references a missing node");
        }
        if (e.bytes <= 0) {
            throw ValidationError("line " + std::to_string(e.line) + ": edge bytes must be > 0");
        }
        succ[s->second].push_back(d->second);
        ++indeg[d->second];
    }

    // Kahn's algorithm, always releasing the earliest node in file order, so a
    // file that is already topologically sorted keeps its order.
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (indeg[i] == 0) ready.push(i);
    }
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        auto u = ready.top();
        ready.pop();
        order.push_back(u);
        for (auto v : succ[u]) {
            if (--indeg[v] == 0) ready.push(v);
        }
    }
    if (order.size() != nodes.size()) throw ValidationError("workload graph contains a cycle");

    std::vector<std::size_t> position(nodes.size());
    std::vector<OperatorNode> sorted;
    for (std::size_t i = 0; i < order.size(); ++i) {
        position[order[i]] = i;
        sorted.push_back(nodes[order[i]]);
    }
    std::vector<Edge> edges;
    for (const auto& e : raw_edges) {
        edges.push_back({position[index.at(e.src)], position[index.at(e.dst)], e.bytes});
    }
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
    });
    return OperatorGraph(std::move(name), std::move(sorted), std::move(edges));
}

OperatorGraph load_network(const std::filesystem::path& path) {
    return parse_network(read_text_file(path.string()), path.stem().string());
}

WorkloadStats operator_footprint(const OperatorNode& op, std::int64_t batch) {
    if (batch < 1) throw ValidationError("batch must be >= 1");
    const std::int64_t bpe = op.bytes_per_element;
    WorkloadStats st;
    switch (op.kind) {
        case OpKind::Conv: {
            const auto n = op.dim("n"), k = op.dim("k"), c = op.dim("c"), r = op.dim("r"),
                       s = op.dim("s"), p = op.dim("p"), q = op.dim("q");
            const auto stride = op.dim_or("stride", 1);
            const auto in_h = checked_add(checked_mul(p - 1, stride), r);
            const auto in_w = checked_add(checked_mul(q - 1, stride), s);
            st.flops = product({2, n, k, c, r, s, p, q, batch});
            st.weight_bytes = product({k, c, r, s, bpe});
            st.input_bytes = product({n, c, in_h, in_w, bpe, batch});
            st.output_bytes = product({n, k, p, q, bpe, batch});
            break;
        }
        case OpKind::DepthwiseConv: {
            const auto n = op.dim("n"), c = op.dim("c"), r = op.dim("r"), s = op.dim("s"),
                       p = op.dim("p"), q = op.dim("q");
            const auto stride = op.dim_or("stride", 1);
            const auto in_h = checked_add(checked_mul(p - 1, stride), r);
            const auto in_w = checked_add(checked_mul(q - 1, stride), s);
            st.flops = product({2, n, c, r, s, p, q, batch});
            st.weight_bytes = product({c, r, s, bpe});
            st.input_bytes = product({n, c, in_h, in_w, bpe, batch});
            st.output_bytes = product({n, c, p, q, bpe, batch});
            break;
        }
        case OpKind::MatMul: {
            const auto m = op.dim("m"), k = op.dim("k"), n = op.dim("n");
            st.flops = product({2, m, k, n, batch});
            st.weight_bytes = product({k, n, bpe});
            st.input_bytes = product({m, k, bpe, batch});
            st.output_bytes = product({m, n, bpe, batch});
            break;
        }
        case OpKind::AttentionScore: {
            const auto h = op.dim("h"), l = op.dim("l"), s = op.dim("s"), d = op.dim("d");
            st.flops = product({2, h, l, s, d, batch});
            st.input_bytes = checked_mul(checked_add(product({h, l, d}), product({h, s, d})),
                                         checked_mul(bpe, batch));
            st.output_bytes = product({h, l, s, bpe, batch});
            st.cache_bytes = product({h, s, d, bpe, batch});
            break;
        }
        case OpKind::AttentionContext: {
            const auto h = op.dim("h"), l = op.dim("l"), s = op.dim("s"), d = op.dim("d");
            st.flops = product({2, h, l, s, d, batch});
            st.input_bytes = checked_mul(checked_add(product({h, l, s}), product({h, s, d})),
                                         checked_mul(bpe, batch));
            st.output_bytes = product({h, l, d, bpe, batch});
            st.cache_bytes = product({h, s, d, bpe, batch});
            break;
        }
        case OpKind::Elementwise: {
            const auto e = op.dim("e");
            const auto arity = op.dim_or("arity", 1);
            st.flops = product({e, op.ops_per_element, batch});
            st.input_bytes = product({e, arity, bpe, batch});
            st.output_bytes = product({e, bpe, batch});
            break;
        }
        case OpKind::Normalization: {
            const auto e = op.dim("e"), c = op.dim("c");
            st.flops = product({4, e, batch});
            st.weight_bytes = product({2, c, bpe});
            st.input_bytes = product({e, bpe, batch});
            st.output_bytes = product({e, bpe, batch});
            break;
        }
    }
    return st;
}

BoundClass classify_boundedness(const WorkloadStats& stats, const ChipletConfig& chiplet,
                                const MemoryModule& memory) {
    if (!(chiplet.peak_flops() > 0.0) || !(memory.bandwidth > 0.0)) {
        throw ValidationError("peak throughput and bandwidth must be positive");
    }
    // intensity > peak / bandwidth, written without the division.
    return stats.arithmetic_intensity() * memory.bandwidth > chiplet.peak_flops()
               ? BoundClass::ComputeBound
               : BoundClass::MemoryBound;
}

std::vector<BatchPoint> batch_response(const OperatorNode& op, const ChipletConfig& chiplet,
                                       const MemoryModule& memory,
                                       const std::vector<std::int64_t>& batches,
                                       const AffinityTable& affinity) {
    if (batches.empty()) throw ValidationError("batch list must be nonempty");
    for (std::size_t i = 1; i < batches.size(); ++i) {
        if (batches[i] <= batches[i - 1]) throw ValidationError("batches must be strictly increasing");
    }
    const auto one = operator_footprint(op, 1);
    const double rate = chiplet.peak_flops() * affinity.at(op.kind, chiplet.dataflow);
    std::vector<BatchPoint> out;
    for (auto b : batches) {
        const double bd = static_cast<double>(b);
        // Per-sample quantities are scaled explicitly so the batch-agnostic
        // curve is exactly linear.
        const double compute = bd * static_cast<double>(one.flops) / rate;
        const double weights = op.batch_class == BatchClass::Sensitive
                                   ? static_cast<double>(one.weight_bytes)
                                   : bd * static_cast<double>(one.weight_bytes);
        const double traffic =
            weights + bd * static_cast<double>(one.input_bytes + one.output_bytes);
        const double latency = std::max(compute, traffic / memory.bandwidth);
        out.push_back({b, latency, bd / latency});
    }
    return out;
}

}  // namespace chipdse
