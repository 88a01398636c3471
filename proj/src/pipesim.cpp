#include "chipdse/pipesim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "chipdse/format.hpp"

namespace chipdse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::int64_t uniform_batch(const AcceleratorDesign& d) {
    if (d.stages.empty()) throw ValidationError("design has no stages");
    const auto b = d.stages.front().batch;
    for (const auto& s : d.stages) {
        if (s.batch != b) throw ValidationError("the simulator needs one batch size across all stages");
    }
    return b;
}

struct StageState {
    bool active = false;
    std::int64_t item = 0;         // next item to start, or the one in progress
    double start = 0.0;
    double compute_end = 0.0;
    std::int64_t tiles_left = 0;
    double last_tile_bytes = 0.0;
    bool in_flight = false;
    double busy = 0.0;
};

struct BusState {
    std::vector<std::size_t> stages;
    double bandwidth = kInf;
    double busy_until = -1.0;
    std::size_t holder = 0;        // stage whose tile is in flight
    std::size_t pointer = 0;       // position in `stages` to offer the token next
};

}  // namespace

double analytical_period(const AcceleratorDesign& d) {
    double t = 0.0;
    for (const auto& s : d.stages) t = std::max(t, s.t_cmp);
    return t;
}

double analytical_first_output(const AcceleratorDesign& d) {
    const auto b = static_cast<double>(uniform_batch(d));
    double t = 0.0;
    for (const auto& s : d.stages) t += b * s.t_cmp;
    return t;
}

SimReport simulate(const SimConfig& cfg) {
    const auto& stages = cfg.design.stages;
    const std::size_t p = stages.size();
    const std::int64_t b = uniform_batch(cfg.design);
    if (cfg.inputs < 1) throw ValidationError("the simulator needs at least one input");
    if (cfg.tile_bytes < 1) throw ValidationError("tile size must be positive");
    if (cfg.buffer_slots < 0) throw ValidationError("buffer slots must be non-negative");
    std::vector<int> bus_map = cfg.bus_map;
    if (bus_map.empty()) {
        for (std::size_t s = 0; s < p; ++s) bus_map.push_back(static_cast<int>(s));
    }
    if (bus_map.size() != p) throw ValidationError("bus map must name one bus per stage");

    std::map<int, std::size_t> bus_index;
    std::vector<BusState> buses;
    std::vector<std::size_t> bus_of(p);
    for (std::size_t s = 0; s < p; ++s) {
        auto [it, fresh] = bus_index.emplace(bus_map[s], buses.size());
        if (fresh) buses.emplace_back();
        auto& bus = buses[it->second];
        bus.stages.push_back(s);
        bus.bandwidth = std::min(bus.bandwidth, stages[s].memory.bandwidth);
        bus_of[s] = it->second;
    }

    const std::int64_t items = (cfg.inputs + b - 1) / b;
    auto samples_in = [&](std::int64_t i) { return std::min(b, cfg.inputs - i * b); };
    const auto tile = static_cast<double>(cfg.tile_bytes);

    SimReport rep;
    rep.tiles.assign(p, 0);
    if (cfg.record_grants) rep.grants.resize(buses.size());
    std::vector<StageState> st(p);
    std::vector<int> occupancy(p, 0);        // boundary s sits between s and s + 1
    std::vector<std::int64_t> finished(p, 0);
    std::vector<double> last_finish;         // last stage, per item
    double head_done = 0.0;                  // when the first stage finished its last item
    if (cfg.trace) rep.trace_csv = "time,stage,event\n";
    auto log = [&](double t, std::size_t s, const char* what) {
        if (cfg.trace) rep.trace_csv += num(t) + "," + std::to_string(s) + "," + what + "\n";
    };

    double now = 0.0;
    while (finished[p - 1] < items) {
        // Transfers that end now.
        for (auto& bus : buses) {
            if (bus.busy_until == now) {
                auto& s = st[bus.holder];
                s.in_flight = false;
                --s.tiles_left;
                bus.busy_until = -1.0;
            }
        }
        // Finishes, in stage order.
        for (std::size_t s = 0; s < p; ++s) {
            auto& x = st[s];
            if (!x.active || x.compute_end > now || x.tiles_left > 0 || x.in_flight) continue;
            x.active = false;
            x.busy += now - x.start;
            if (s > 0) --occupancy[s - 1];
            ++finished[s];
            ++x.item;
            if (s + 1 == p) last_finish.push_back(now);
            if (s == 0 && x.item == items) head_done = now;
            log(now, s, "finish");
        }
        // Starts.
        for (std::size_t s = 0; s < p; ++s) {
            auto& x = st[s];
            if (x.active || x.item >= items) continue;
            if (s > 0 && finished[s - 1] <= x.item) continue;
            if (s + 1 < p && occupancy[s] >= cfg.buffer_slots) continue;
            if (s + 1 < p) ++occupancy[s];
            const auto n = static_cast<double>(samples_in(x.item));
            const double bytes = n * stages[s].traffic_bytes;
            x.active = true;
            x.start = now;
            x.compute_end = now + n * stages[s].compute_time;
            x.tiles_left = bytes > 0.0 ? static_cast<std::int64_t>(std::ceil(bytes / tile)) : 0;
            x.last_tile_bytes = bytes - static_cast<double>(x.tiles_left - 1) * tile;
            rep.tiles[s] += x.tiles_left;
            log(now, s, "start");
        }
        // Token: the next stage in round-robin order with a pending tile gets
        // one grant; stages without demand pass in zero time.
        for (std::size_t k = 0; k < buses.size(); ++k) {
            auto& bus = buses[k];
            if (bus.busy_until >= 0.0) continue;
            for (std::size_t step = 0; step < bus.stages.size(); ++step) {
                const std::size_t pos = (bus.pointer + step) % bus.stages.size();
                const std::size_t s = bus.stages[pos];
                auto& x = st[s];
                if (!x.active || x.tiles_left == 0 || x.in_flight) continue;
                const double bytes = x.tiles_left == 1 ? x.last_tile_bytes : tile;
                bus.busy_until = now + bytes / bus.bandwidth;
                bus.holder = s;
                bus.pointer = (pos + 1) % bus.stages.size();
                x.in_flight = true;
                if (cfg.record_grants) {
                    std::size_t pending = 0;
                    for (auto o : bus.stages) {
                        pending += st[o].active && (st[o].tiles_left > 0 || o == s);
                    }
                    rep.grants[k].push_back({s, pending});
                }
                log(now, s, "tile");
                break;
            }
        }
        if (finished[p - 1] >= items) break;

        double next = kInf;
        for (const auto& bus : buses) {
            if (bus.busy_until >= 0.0) next = std::min(next, bus.busy_until);
        }
        for (const auto& x : st) {
            if (!x.active) continue;
            if (x.compute_end > now) next = std::min(next, x.compute_end);
            else if (x.tiles_left == 0 && !x.in_flight) next = std::min(next, now);
        }
        if (next == kInf) {
            std::string blocked;
            for (std::size_t s = 0; s < p; ++s) {
                if (st[s].item < items) blocked += (blocked.empty() ? "" : ",") + std::to_string(s);
            }
            throw InfeasibleError("pipesim", "pipeline deadlocked; blocked stages: " + blocked);
        }
        now = next;
    }

    rep.total_time = now;
    rep.first_output_latency = last_finish.front();
    // Steady state from full batches that leave while the first stage is
    // still busy; after that the drain runs without upstream contention.
    std::int64_t full = cfg.inputs / b;
    std::int64_t window = full;
    while (window > 2 && last_finish[static_cast<std::size_t>(window - 1)] > head_done) --window;
    if (window >= 2) full = window;
    if (full >= 2) {
        rep.period = (last_finish[static_cast<std::size_t>(full - 1)] - last_finish.front()) /
                     static_cast<double>((full - 1) * b);
    } else {
        rep.period = rep.first_output_latency / static_cast<double>(samples_in(0));
    }
    for (std::size_t s = 0; s < p; ++s) {
        rep.busy.push_back(st[s].busy);
        rep.idle.push_back(rep.total_time - st[s].busy);
        rep.dynamic_energy += static_cast<double>(cfg.inputs) * stages[s].e_dyn;
        rep.energy += stages[s].p_static * rep.total_time;
    }
    rep.energy += rep.dynamic_energy;
    return rep;
}

}  // namespace chipdse
