#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chipdse/cht.hpp"

namespace chipdse {

struct PnrParams {
    double grid_mm = 0.1;
    int edge_capacity = 4;  // routing tracks per grid edge
    int max_side = 2000;    // grid units
};

/// Chiplet instance to place, in grid units.
struct RectSpec {
    std::size_t stage = 0;
    int instance = 0;
    int w = 1;
    int h = 1;
};

struct PlacedRect {
    std::size_t stage = 0;
    int instance = 0;
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;
    bool rotated = false;
};

struct GridPoint {
    int x = 0;
    int y = 0;
    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Connection between two placed rectangles (indices into rects).
struct Net {
    std::size_t from = 0;
    std::size_t to = 0;
};

struct Route {
    Net net;
    std::vector<GridPoint> path;  // unit steps from the source port to the sink port
    std::size_t length() const { return path.empty() ? 0 : path.size() - 1; }
};

struct Placement {
    int width = 0;
    int height = 0;
    std::vector<PlacedRect> rects;
    std::vector<Net> nets;
    std::vector<Route> routes;
    int edge_capacity = 4;
    double grid_mm = 0.1;

    double area_mm2() const { return width * grid_mm * height * grid_mm; }
};

/// One rectangle per (stage, tp replica): a square of the chiplet area
/// rounded up to the grid.
std::vector<RectSpec> rect_specs(const AcceleratorDesign& design, const PnrParams& params = {});

/// Nets chaining every rectangle in pipeline order (replicas of a stage,
/// then the next stage).
std::vector<Net> pipeline_nets(const std::vector<PlacedRect>& rects);

/// Next-fit shelf packing in pipeline order; odd shelves run right to left
/// so consecutive stages stay adjacent. nullopt when the rectangles do not fit.
std::optional<Placement> place(const std::vector<RectSpec>& specs, int width, int height,
                               const PnrParams& params = {});

/// Port for a net endpoint: midpoint of the rectangle edge that faces `other`.
GridPoint port_point(const PlacedRect& self, const PlacedRect& other);

/// Routes `placement.nets` in order with breadth-first search over grid
/// edges not interior to any rectangle. Returns false when a net cannot be
/// routed within the remaining capacity.
bool route_nets(Placement& placement);

/// Place and route in one step.
std::optional<Placement> place_and_route(const std::vector<RectSpec>& specs, int width, int height,
                                         const PnrParams& params = {});

struct FootprintResult {
    Placement placement;
    int side = 0;
    int probes = 0;
};

/// Smallest square side (grid units) that places and routes, found by
/// bisection between an infeasible lower bound and a feasible upper bound.
/// The returned side is feasible and side - 1 is not.
FootprintResult minimize_footprint(const std::vector<RectSpec>& specs, const PnrParams& params = {});
FootprintResult minimize_footprint(const AcceleratorDesign& design, const PnrParams& params = {});

/// Independent checks: overlap, bounds, ports, path continuity, blocked
/// edges and per-edge capacity. Empty when valid.
std::vector<std::string> validate_placement(const Placement& placement);

/// Total perimeter of N equal squares relative to one square of the same
/// total area.
double perimeter_scaling(int n);

/// Edge length (mm) of N equal square chiplets of summed area A times a
/// per-mm interface bandwidth.
double edge_bandwidth(double total_area_mm2, int n, double bytes_per_s_per_mm);

/// Plain-text grid: '.' free, a letter per stage, '*' routed track.
std::string ascii_dump(const Placement& placement);
std::string json_dump(const Placement& placement);

}  // namespace chipdse
