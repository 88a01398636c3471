#include <algorithm>
#include <cmath>
#include <random>

#include "chipdse/workload.hpp"
#include "doctest.h"

using namespace chipdse;

namespace {

OperatorNode matmul(std::int64_t m, std::int64_t k, std::int64_t n) {
    OperatorNode op;
    op.id = "mm";
    op.kind = OpKind::MatMul;
    op.dims = {{"m", m}, {"k", k}, {"n", n}};
    op.batch_class = BatchClass::Sensitive;
    return op;
}

}  // namespace

TEST_CASE("single matmul file loads as one node") {
    auto g = parse_network("node a matmul m=64 k=64 n=64\n");
    CHECK(g.size() == 1);
    CHECK(g.edges().empty());
    CHECK(g.node(0).kind == OpKind::MatMul);
    CHECK(g.node(0).batch_class == BatchClass::Sensitive);
}

TEST_CASE("loader rejects malformed and invalid graphs") {
    CHECK_THROWS_AS(parse_network("node a matmul m=1 k=1 n=1\nedge a b bytes=4\n"), ValidationError);
    CHECK_THROWS_AS(parse_network("node a warp m=1\n"), ParseError);
    CHECK_THROWS_AS(parse_network("node a matmul m=0 k=1 n=1\n"), ValidationError);
    CHECK_THROWS_AS(parse_network("node a matmul m=1 k=1\n"), ParseError);
    CHECK_THROWS_AS(parse_network("node a matmul m=1 k=1 n=1 q=3\n"), ParseError);
    CHECK_THROWS_AS(parse_network("node a matmul m=1 k=1 n=1 m=2\n"), ParseError);
    CHECK_THROWS_AS(parse_network("node a matmul m=x k=1 n=1\n"), ParseError);
    CHECK_THROWS_AS(parse_network("node a matmul m=1 k=1 n=1\nnode a matmul m=1 k=1 n=1\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_network("node a matmul m=1 k=1 n=1\nnode b matmul m=1 k=1 n=1\n"
                                  "edge a b bytes=2\nedge b a bytes=2\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_network("node a matmul m=1 k=1 n=1\nnode b matmul m=1 k=1 n=1\n"
                                  "edge a b bytes=0\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_network("bogus a\n"), ParseError);
}

TEST_CASE("loader reorders into a stable topological order") {
    auto g = parse_network(
        "# comment line\n"
        "node c elementwise e=4\n"
        "node a matmul m=1 k=2 n=2   # trailing\n"
        "node b matmul m=1 k=2 n=2\n"
        "edge a c bytes=4\n"
        "edge b c bytes=4\n");
    REQUIRE(g.size() == 3);
    CHECK(g.node(0).id == "a");
    CHECK(g.node(1).id == "b");
    CHECK(g.node(2).id == "c");
    for (const auto& e : g.edges()) CHECK(e.src < e.dst);
}

TEST_CASE("topological order holds on random DAGs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 10);
        std::vector<int> perm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::string text;
        for (int i : perm) text += "node n" + std::to_string(i) + " elementwise e=8\n";
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (rng() % 3 == 0) {
                    text += "edge n" + std::to_string(i) + " n" + std::to_string(j) + " bytes=16\n";
                }
            }
        }
        auto g = parse_network(text);
        REQUIRE(g.size() == static_cast<std::size_t>(n));
        for (const auto& e : g.edges()) {
            CHECK(e.src < e.dst);
            CHECK(std::stoi(g.node(e.src).id.substr(1)) < std::stoi(g.node(e.dst).id.substr(1)));
        }
    }
}

TEST_CASE("footprint matches hand loop counts") {
    auto op = matmul(2, 3, 4);
    auto s1 = operator_footprint(op, 1);
    CHECK(s1.flops == 48);
    CHECK(s1.weight_bytes == 24);
    CHECK(s1.input_bytes == 12);
    CHECK(s1.output_bytes == 16);
    auto s2 = operator_footprint(op, 2);
    CHECK(s2.flops == 96);
    CHECK(s2.weight_bytes == 24);
    CHECK(s2.input_bytes == 24);

    OperatorNode conv;
    conv.kind = OpKind::Conv;
    conv.dims = {{"n", 1}, {"k", 1}, {"c", 1}, {"r", 1}, {"s", 1}, {"p", 1}, {"q", 1}};
    CHECK(operator_footprint(conv, 1).flops == 2);

    // 3x3 conv, stride 2: input window (p-1)*2+3 per side.
    conv.dims = {{"n", 1}, {"k", 8}, {"c", 4}, {"r", 3}, {"s", 3}, {"p", 5}, {"q", 5}, {"stride", 2}};
    conv.bytes_per_element = 1;
    auto c = operator_footprint(conv, 1);
    CHECK(c.flops == 2 * 8 * 4 * 9 * 25);
    CHECK(c.weight_bytes == 8 * 4 * 9);
    CHECK(c.input_bytes == 4 * 11 * 11);
    CHECK(c.output_bytes == 8 * 25);
}

TEST_CASE("footprint is linear in batch for every kind") {
    std::vector<OperatorNode> ops;
    ops.push_back(matmul(3, 5, 7));
    OperatorNode att;
    att.kind = OpKind::AttentionScore;
    att.dims = {{"h", 2}, {"l", 3}, {"s", 4}, {"d", 5}};
    ops.push_back(att);
    att.kind = OpKind::AttentionContext;
    ops.push_back(att);
    OperatorNode ew;
    ew.kind = OpKind::Elementwise;
    ew.dims = {{"e", 100}, {"arity", 2}};
    ops.push_back(ew);
    OperatorNode norm;
    norm.kind = OpKind::Normalization;
    norm.dims = {{"e", 64}, {"c", 16}};
    ops.push_back(norm);
    OperatorNode dw;
    dw.kind = OpKind::DepthwiseConv;
    dw.dims = {{"n", 1}, {"c", 8}, {"r", 3}, {"s", 3}, {"p", 4}, {"q", 4}};
    ops.push_back(dw);
    for (const auto& op : ops) {
        const auto one = operator_footprint(op, 1);
        for (std::int64_t b : {2, 3, 17}) {
            const auto s = operator_footprint(op, b);
            CHECK(s.flops == b * one.flops);
            CHECK(s.weight_bytes == one.weight_bytes);
            CHECK(s.input_bytes == b * one.input_bytes);
            CHECK(s.output_bytes == b * one.output_bytes);
            CHECK(s.arithmetic_intensity() ==
                  doctest::Approx(static_cast<double>(s.flops) / static_cast<double>(s.offchip_bytes())));
        }
    }
}

TEST_CASE("footprint overflow is an error") {
    auto op = matmul(std::int64_t{1} << 40, std::int64_t{1} << 20, 8);
    CHECK_THROWS_AS(operator_footprint(op, 1), ValidationError);
    CHECK_THROWS_AS(operator_footprint(matmul(1, 1, 1), 0), ValidationError);
}

TEST_CASE("boundedness follows the ridge point") {
    auto chiplet = make_chiplet(Dataflow::WS, 1, 1);
    MemoryModule mem = default_memory(MemoryKind::HBM3);
    mem.bandwidth = chiplet.peak_flops() / 10.0;  // ridge at 10 flops/B
    WorkloadStats hi{1000, 1, 0, 0};
    CHECK(classify_boundedness(hi, chiplet, mem) == BoundClass::ComputeBound);
    WorkloadStats tie{10, 1, 0, 0};
    CHECK(classify_boundedness(tie, chiplet, mem) == BoundClass::MemoryBound);
    mem.bandwidth = 0.0;
    CHECK_THROWS(classify_boundedness(hi, chiplet, mem));
}

TEST_CASE("decode-sized matmul is memory-bound on every chiplet scaling with HBM3") {
    auto op = matmul(1, 9216, 9216);
    const auto st = operator_footprint(op, 1);
    for (const auto& c : full_chiplet_menu()) {
        CHECK(classify_boundedness(st, c, default_memory(MemoryKind::HBM3)) == BoundClass::MemoryBound);
    }
}

TEST_CASE("batch-agnostic operators scale latency linearly") {
    OperatorNode att;
    att.kind = OpKind::AttentionScore;
    att.batch_class = BatchClass::Agnostic;
    att.dims = {{"h", 64}, {"l", 1}, {"s", 2048}, {"d", 144}};
    auto curve = batch_response(att, make_chiplet(Dataflow::OS, 2, 4), default_memory(MemoryKind::HBM3),
                                {1, 2, 4});
    REQUIRE(curve.size() == 3);
    for (const auto& p : curve) {
        CHECK(p.latency / curve[0].latency == doctest::Approx(static_cast<double>(p.batch)).epsilon(1e-12));
        CHECK(std::abs(p.throughput / curve[0].throughput - 1.0) <= 1e-6);
    }
}

TEST_CASE("batch-sensitive matmul saturates at the roofline crossover") {
    auto chip = make_chiplet(Dataflow::WS, 1, 1);
    auto mem = default_memory(MemoryKind::HBM3);
    auto op = matmul(1, 4096, 4096);
    // Oracle: per batch b, traffic = W + b*(in+out), compute = b*F/peak.
    const auto one = operator_footprint(op, 1);
    const double peak = chip.peak_flops();
    const double w = static_cast<double>(one.weight_bytes);
    const double io = static_cast<double>(one.input_bytes + one.output_bytes);
    const double f = static_cast<double>(one.flops);
    // Crossover: b*f/peak == (w + b*io)/bw.
    const double crossover = w / (f * mem.bandwidth / peak - io);
    std::vector<std::int64_t> batches;
    for (std::int64_t b = 1; b <= 4096; b *= 2) batches.push_back(b);
    auto curve = batch_response(op, chip, mem, batches);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].throughput >= curve[i - 1].throughput);
        if (static_cast<double>(curve[i].batch) <= crossover) {
            CHECK(curve[i].throughput > curve[i - 1].throughput);
        }
        if (static_cast<double>(curve[i - 1].batch) >= crossover) {
            CHECK(curve[i].throughput == doctest::Approx(curve[i - 1].throughput).epsilon(1e-12));
        }
    }

    // Already compute-bound at batch 1: flat.
    auto big = matmul(4096, 4096, 4096);
    auto flat = batch_response(big, chip, mem, {1, 2, 8});
    CHECK(flat[1].throughput == doctest::Approx(flat[0].throughput).epsilon(1e-12));
    CHECK(flat[2].throughput == doctest::Approx(flat[0].throughput).epsilon(1e-12));
    CHECK_THROWS(batch_response(big, chip, mem, {2, 1}));
}
