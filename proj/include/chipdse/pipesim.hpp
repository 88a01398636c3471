#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chipdse/cht.hpp"

namespace chipdse {

struct SimConfig {
    AcceleratorDesign design;
    std::int64_t inputs = 16;       // samples pushed through the pipeline
    std::vector<int> bus_map;       // stage -> bus id; empty = one private bus per stage
    std::int64_t tile_bytes = 64 * 1024;
    int buffer_slots = 2;           // per inter-stage boundary
    bool trace = false;
    bool record_grants = false;
};

/// One token grant: the stage served and how many stages on the bus had a
/// tile pending at that moment.
struct Grant {
    std::size_t stage = 0;
    std::size_t pending = 0;
};

struct SimReport {
    std::vector<double> busy;             // per stage, seconds
    std::vector<double> idle;
    std::vector<std::int64_t> tiles;      // per stage
    std::vector<std::vector<Grant>> grants;  // per bus, when recorded
    double period = 0.0;                  // steady-state seconds per sample
    double first_output_latency = 0.0;    // seconds until the first batch leaves
    double total_time = 0.0;
    double energy = 0.0;
    double dynamic_energy = 0.0;
    std::string trace_csv;                // time,stage,event
};

/// Analytical counterparts for an uncontended pipeline: max and sum of the
/// per-batch stage latencies, divided by the batch for the period.
double analytical_period(const AcceleratorDesign& design);
double analytical_first_output(const AcceleratorDesign& design);

/// Event-driven pipeline run. Throws ValidationError for malformed input and
/// InfeasibleError("pipesim", ...) on deadlock, naming the blocked stages.
SimReport simulate(const SimConfig& config);

}  // namespace chipdse
