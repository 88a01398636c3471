#include <cmath>

#include "chipdse/costmodel.hpp"
#include "doctest.h"

using namespace chipdse;

namespace {

StageCandidate stage(const ChipletConfig& chip, int tp, double e, double p, double t) {
    StageCandidate c;
    c.chiplet = chip;
    c.tp = tp;
    c.e_dyn = e;
    c.p_static = p;
    c.t_cmp = t;
    c.memory = default_memory(MemoryKind::DDR5);
    c.memory_cost = 3.0;
    c.die_cost = die_cost(chip.area_mm2);
    c.dollar_cost = tp * c.die_cost + c.memory_cost;
    return c;
}

AcceleratorDesign design_of(std::vector<StageCandidate> stages, double period) {
    AcceleratorDesign d;
    d.stages = std::move(stages);
    d.period = period;
    d.objective = 0.0;
    return d;
}

}  // namespace

TEST_CASE("yield formula") {
    CostParams p;
    CHECK(die_yield(1e-9, p) == doctest::Approx(1.0));
    CHECK(die_yield(100.0, p) == doctest::Approx(std::pow(1.0 + 0.1 / 3.0, -3.0)).epsilon(1e-15));
    CHECK(die_yield(100.0, p) == doctest::Approx(0.9063).epsilon(1e-4));
    for (double a = 1.0; a < 800.0; a *= 1.7) CHECK(die_yield(2 * a, p) < die_yield(a, p));
    CHECK_THROWS(die_yield(0.0, p));
}

TEST_CASE("die cost is superlinear and partitioning pays") {
    CostParams p;
    for (double a = 1.0; a <= 400.0; a *= 1.3) CHECK(die_cost(2 * a, p) > 2 * die_cost(a, p));
    CHECK(4 * die_cost(100.0, p) < die_cost(400.0, p));
    CHECK_THROWS_AS(die_cost(900.0, p), ValidationError);

    CostParams perfect;
    perfect.defect_density = 0.0;
    for (double a : {10.0, 50.0, 200.0}) {
        CHECK(die_cost(a, perfect) ==
              perfect.wafer_cost / static_cast<double>(gross_dies_per_wafer(a, perfect)));
    }
    // pi*150^2/100 - pi*300/sqrt(200) = 706.86 - 66.64
    CHECK(gross_dies_per_wafer(100.0, p) == 640);
}

TEST_CASE("recurring cost") {
    CostParams p;
    CHECK(design_re_cost(design_of({}, 1.0), 0.0, p) == p.package_base);
    auto chip = make_chiplet(Dataflow::WS, 2, 4);
    auto d1 = design_of({stage(chip, 1, 1, 1, 1), stage(chip, 1, 1, 1, 1)}, 1.0);
    auto d2 = design_of({stage(chip, 2, 1, 1, 1), stage(chip, 2, 1, 1, 1)}, 1.0);
    auto b1 = cost_breakdown(d1, 50.0, CostMode::RecurringOnly, 1, p);
    auto b2 = cost_breakdown(d2, 50.0, CostMode::RecurringOnly, 1, p);
    CHECK(b2.die == doctest::Approx(2 * b1.die).epsilon(1e-15));
    CHECK(b1.nre == 0.0);
    CHECK(design_re_cost(d1, 50.0, p) == doctest::Approx(b1.recurring()));
}

TEST_CASE("NRE amortization") {
    auto chip = make_chiplet(Dataflow::WS, 1, 1);
    auto d = design_of({stage(chip, 1, 1, 1, 1)}, 1.0);
    CostParams p;
    const double re = design_re_cost(d, 30.0, p);
    double prev = std::numeric_limits<double>::infinity();
    for (double v : {1e3, 1e5, 1e7, 1e9, 1e12}) {
        p.volume = v;
        const double u = amortized_unit_cost(d, 8, 30.0, p);
        CHECK(u < prev);
        prev = u;
    }
    CHECK(prev == doctest::Approx(re).epsilon(1e-6));

    p.volume = 1e6;
    const double pooled = amortized_nre(8, p);
    const double unconstrained = amortized_nre(8 * 200, p);
    CHECK(unconstrained / pooled == doctest::Approx((20e6 * 1600 + 5e6) / (20e6 * 8 + 5e6)));
    CHECK(unconstrained / pooled > 150.0);

    p.volume = 1;
    p.networks_sharing_pool = 1;
    CHECK(amortized_unit_cost(d, 1, 30.0, p) == doctest::Approx(re + 25e6));
}

TEST_CASE("metric set identities") {
    auto chip = make_chiplet(Dataflow::OS, 1, 4);
    auto one = design_of({stage(chip, 1, 2.0, 0.5, 3.0)}, 4.0);
    auto m = metrics(one);
    CHECK(m.energy == 4.0);
    CHECK(m.edp == 16.0);
    CHECK(m.edpc == doctest::Approx(m.edp * m.dollar_cost));
    CHECK(m.ec == doctest::Approx(m.energy * m.dollar_cost));

    auto doubled = one;
    doubled.stages[0].e_dyn *= 2;
    doubled.stages[0].p_static *= 2;
    auto m2 = metrics(doubled);
    CHECK(m2.energy == 2 * m.energy);
    CHECK(m2.ec == 2 * m.ec);
    CHECK(m2.edp == 2 * m.edp);
    CHECK(m2.edpc == 2 * m.edpc);

    MetricOptions e2e;
    e2e.delay_mode = DelayMode::EndToEnd;
    e2e.e2e_factor = 3.0;
    CHECK(metrics(one, e2e).delay == 12.0);

    MetricOptions am;
    am.cost_mode = CostMode::Amortized;
    auto ma = metrics(one, am);
    CHECK(ma.dollar_cost > m.dollar_cost);
    CHECK(ma.edpc == doctest::Approx(ma.energy * ma.delay * ma.dollar_cost));

    auto bad = one;
    bad.period = 1.0;
    CHECK_THROWS(metrics(bad));
    CHECK_THROWS(metrics(design_of({}, 1.0)));
}
