#include "chipdse/pnr.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "json.hpp"

namespace chipdse {

namespace {

std::int64_t isqrt_ceil(std::int64_t v) {
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
    while (r * r < v) ++r;
    while (r > 0 && (r - 1) * (r - 1) >= v) --r;
    return r;
}

// Grid edges: horizontal (x,y)-(x+1,y) and vertical (x,y)-(x,y+1).
struct EdgeGrid {
    int w, h;
    std::vector<int> hcap, vcap;  // remaining capacity, -1 when blocked

    EdgeGrid(const Placement& p) : w(p.width), h(p.height) {
        hcap.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h + 1), p.edge_capacity);
        vcap.assign(static_cast<std::size_t>(w + 1) * static_cast<std::size_t>(h), p.edge_capacity);
        for (const auto& r : p.rects) {
            for (int y = r.y + 1; y < r.y + r.h; ++y) {
                for (int x = r.x; x < r.x + r.w; ++x) hcap[hi(x, y)] = -1;
            }
            for (int x = r.x + 1; x < r.x + r.w; ++x) {
                for (int y = r.y; y < r.y + r.h; ++y) vcap[vi(x, y)] = -1;
            }
        }
    }
    std::size_t hi(int x, int y) const { return static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x); }
    std::size_t vi(int x, int y) const { return static_cast<std::size_t>(x) * h + static_cast<std::size_t>(y); }
    std::size_t node(int x, int y) const { return static_cast<std::size_t>(y) * (w + 1) + static_cast<std::size_t>(x); }

    // Capacity slot of the step from (x,y) by (dx,dy), or nullptr if off grid.
    int* slot(int x, int y, int dx, int dy) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx > w || ny > h) return nullptr;
        if (dy == 0) return &hcap[hi(std::min(x, nx), y)];
        return &vcap[vi(x, std::min(y, ny))];
    }
};

constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

}  // namespace

std::vector<RectSpec> rect_specs(const AcceleratorDesign& design, const PnrParams& params) {
    std::vector<RectSpec> out;
    for (std::size_t s = 0; s < design.stages.size(); ++s) {
        const auto& st = design.stages[s];
        const int side = static_cast<int>(std::ceil(std::sqrt(st.chiplet.area_mm2) / params.grid_mm - 1e-9));
        for (int i = 0; i < st.tp; ++i) out.push_back({s, i, std::max(side, 1), std::max(side, 1)});
    }
    return out;
}

std::vector<Net> pipeline_nets(const std::vector<PlacedRect>& rects) {
    std::vector<Net> nets;
    for (std::size_t i = 1; i < rects.size(); ++i) nets.push_back({i - 1, i});
    return nets;
}

std::optional<Placement> place(const std::vector<RectSpec>& specs, int width, int height, const PnrParams& params) {
    if (width <= 0 || height <= 0) throw ValidationError("interposer dimensions must be positive");
    Placement p;
    p.width = width;
    p.height = height;
    p.edge_capacity = params.edge_capacity;
    p.grid_mm = params.grid_mm;
    std::int64_t area = 0;
    for (const auto& s : specs) {
        if (s.w <= 0 || s.h <= 0) throw ValidationError("chiplet rectangles must have positive size");
        if (s.w > width || s.h > height) return std::nullopt;
        area += std::int64_t{s.w} * s.h;
    }
    if (area > std::int64_t{width} * height) return std::nullopt;

    int shelf = 0, shelf_y = 0, shelf_h = 0, used = 0;
    for (const auto& s : specs) {
        if (used + s.w > width) {
            ++shelf;
            shelf_y += shelf_h;
            shelf_h = 0;
            used = 0;
        }
        if (shelf_y + s.h > height) return std::nullopt;
        const int x = shelf % 2 == 0 ? used : width - used - s.w;
        p.rects.push_back({s.stage, s.instance, x, shelf_y, s.w, s.h, false});
        used += s.w;
        shelf_h = std::max(shelf_h, s.h);
    }
    p.nets = pipeline_nets(p.rects);
    return p;
}

GridPoint port_point(const PlacedRect& self, const PlacedRect& other) {
    // Doubled centres keep the comparison in integers.
    const int dx = (2 * other.x + other.w) - (2 * self.x + self.w);
    const int dy = (2 * other.y + other.h) - (2 * self.y + self.h);
    if (std::abs(dx) >= std::abs(dy)) {
        return {dx >= 0 ? self.x + self.w : self.x, self.y + self.h / 2};
    }
    return {self.x + self.w / 2, dy >= 0 ? self.y + self.h : self.y};
}

bool route_nets(Placement& p) {
    p.routes.clear();
    EdgeGrid grid(p);
    const std::size_t nodes = static_cast<std::size_t>(p.width + 1) * static_cast<std::size_t>(p.height + 1);
    std::vector<std::int64_t> parent(nodes);
    for (const auto& net : p.nets) {
        const auto src = port_point(p.rects.at(net.from), p.rects.at(net.to));
        const auto dst = port_point(p.rects.at(net.to), p.rects.at(net.from));
        std::fill(parent.begin(), parent.end(), -1);
        std::deque<GridPoint> queue = {src};
        parent[grid.node(src.x, src.y)] = static_cast<std::int64_t>(grid.node(src.x, src.y));
        bool found = src == dst;
        while (!queue.empty() && !found) {
            const auto cur = queue.front();
            queue.pop_front();
            for (int d = 0; d < 4 && !found; ++d) {
                const int* cap = grid.slot(cur.x, cur.y, kDx[d], kDy[d]);
                if (cap == nullptr || *cap <= 0) continue;
                const GridPoint nxt{cur.x + kDx[d], cur.y + kDy[d]};
                auto& par = parent[grid.node(nxt.x, nxt.y)];
                if (par >= 0) continue;
                par = static_cast<std::int64_t>(grid.node(cur.x, cur.y));
                found = nxt == dst;
                queue.push_back(nxt);
            }
        }
        if (!found) return false;
        Route r{net, {}};
        for (GridPoint at = dst;;) {
            r.path.push_back(at);
            if (at == src) break;
            const auto par = static_cast<std::size_t>(parent[grid.node(at.x, at.y)]);
            const GridPoint prev{static_cast<int>(par % static_cast<std::size_t>(p.width + 1)),
                                 static_cast<int>(par / static_cast<std::size_t>(p.width + 1))};
            --*grid.slot(prev.x, prev.y, at.x - prev.x, at.y - prev.y);
            at = prev;
        }
        std::reverse(r.path.begin(), r.path.end());
        p.routes.push_back(std::move(r));
    }
    return true;
}

std::optional<Placement> place_and_route(const std::vector<RectSpec>& specs, int width, int height,
                                         const PnrParams& params) {
    auto p = place(specs, width, height, params);
    if (!p || !route_nets(*p)) return std::nullopt;
    return p;
}

FootprintResult minimize_footprint(const std::vector<RectSpec>& specs, const PnrParams& params) {
    if (specs.empty()) throw ValidationError("nothing to place");
    std::int64_t area = 0;
    int largest = 0;
    for (const auto& s : specs) {
        area += std::int64_t{s.w} * s.h;
        largest = std::max({largest, s.w, s.h});
    }
    // Below either bound nothing fits, so lo starts infeasible.
    int lo = static_cast<int>(std::max<std::int64_t>(largest, isqrt_ceil(area))) - 1;
    FootprintResult out;
    std::optional<Placement> best;
    int hi = lo + 1;
    while (true) {
        if (hi > params.max_side) {
            throw InfeasibleError("pnr", "chiplets do not place and route within the maximum interposer side of " +
                                             std::to_string(params.max_side) + " grid units");
        }
        ++out.probes;
        best = place_and_route(specs, hi, hi, params);
        if (best) break;
        lo = hi;
        hi = std::min(params.max_side + 1, lo + std::max(1, lo / 4));
        if (lo == params.max_side) hi = params.max_side + 1;
    }
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        ++out.probes;
        auto p = place_and_route(specs, mid, mid, params);
        if (p) {
            hi = mid;
            best = std::move(p);
        } else {
            lo = mid;
        }
    }
    out.side = hi;
    out.placement = std::move(*best);
    return out;
}

FootprintResult minimize_footprint(const AcceleratorDesign& design, const PnrParams& params) {
    return minimize_footprint(rect_specs(design, params), params);
}

std::vector<std::string> validate_placement(const Placement& p) {
    std::vector<std::string> errors;
    auto rect_name = [&](std::size_t i) {
        return "stage " + std::to_string(p.rects[i].stage) + "/" + std::to_string(p.rects[i].instance);
    };
    for (std::size_t i = 0; i < p.rects.size(); ++i) {
        const auto& a = p.rects[i];
        if (a.x < 0 || a.y < 0 || a.x + a.w > p.width || a.y + a.h > p.height) {
            errors.push_back(rect_name(i) + " is outside the interposer");
        }
        for (std::size_t j = i + 1; j < p.rects.size(); ++j) {
            const auto& b = p.rects[j];
            if (a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h) {
                errors.push_back(rect_name(i) + " overlaps " + rect_name(j));
            }
        }
    }
    if (p.routes.size() != p.nets.size()) errors.push_back("not every net is routed");
    auto interior = [&](GridPoint a, GridPoint b) {
        // Midpoint of the step, doubled, strictly inside some rectangle.
        const int mx = a.x + b.x, my = a.y + b.y;
        return std::any_of(p.rects.begin(), p.rects.end(), [&](const PlacedRect& r) {
            return mx > 2 * r.x && mx < 2 * (r.x + r.w) && my > 2 * r.y && my < 2 * (r.y + r.h);
        });
    };
    std::map<std::tuple<int, int, int, int>, int> usage;
    for (std::size_t k = 0; k < p.routes.size(); ++k) {
        const auto& r = p.routes[k];
        const std::string tag = "route " + std::to_string(k);
        if (r.path.empty()) {
            errors.push_back(tag + " is empty");
            continue;
        }
        const auto& from = p.rects.at(r.net.from);
        const auto& to = p.rects.at(r.net.to);
        if (!(r.path.front() == port_point(from, to)) || !(r.path.back() == port_point(to, from))) {
            errors.push_back(tag + " does not connect its ports");
        }
        for (std::size_t s = 1; s < r.path.size(); ++s) {
            const auto a = r.path[s - 1], b = r.path[s];
            if (std::abs(a.x - b.x) + std::abs(a.y - b.y) != 1) errors.push_back(tag + " has a non-unit step");
            if (b.x < 0 || b.y < 0 || b.x > p.width || b.y > p.height) errors.push_back(tag + " leaves the grid");
            if (interior(a, b)) errors.push_back(tag + " crosses a chiplet");
            const auto key = std::make_tuple(std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x),
                                             std::max(a.y, b.y));
            if (++usage[key] > p.edge_capacity) errors.push_back(tag + " exceeds edge capacity");
        }
    }
    return errors;
}

double perimeter_scaling(int n) {
    if (n < 1) throw ValidationError("chiplet count must be at least 1");
    return std::sqrt(static_cast<double>(n));
}

double edge_bandwidth(double total_area_mm2, int n, double bytes_per_s_per_mm) {
    if (n < 1 || !(total_area_mm2 > 0.0)) throw ValidationError("edge bandwidth needs n >= 1 and a positive area");
    return 4.0 * std::sqrt(total_area_mm2 / n) * n * bytes_per_s_per_mm;
}

std::string ascii_dump(const Placement& p) {
    // Cells are grid squares; a route marks the cells left/below each step.
    std::vector<std::string> rows(static_cast<std::size_t>(p.height), std::string(static_cast<std::size_t>(p.width), '.'));
    for (const auto& r : p.routes) {
        for (const auto& pt : r.path) {
            const int cx = std::min(pt.x, p.width - 1), cy = std::min(pt.y, p.height - 1);
            rows[static_cast<std::size_t>(cy)][static_cast<std::size_t>(cx)] = '*';
        }
    }
    for (const auto& r : p.rects) {
        const char c = static_cast<char>('A' + r.stage % 26);
        for (int y = r.y; y < r.y + r.h; ++y) {
            for (int x = r.x; x < r.x + r.w; ++x) {
                auto& cell = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
                if (cell != '*') cell = c;
            }
        }
    }
    std::string out;
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) out += *it + "\n";
    return out;
}

std::string json_dump(const Placement& p) {
    nlohmann::ordered_json j;
    j["grid_mm"] = p.grid_mm;
    j["width"] = p.width;
    j["height"] = p.height;
    j["edge_capacity"] = p.edge_capacity;
    j["rects"] = nlohmann::ordered_json::array();
    for (const auto& r : p.rects) {
        j["rects"].push_back({{"stage", r.stage}, {"instance", r.instance}, {"x", r.x}, {"y", r.y}, {"w", r.w},
                              {"h", r.h}, {"rotation", r.rotated ? 90 : 0}});
    }
    j["routes"] = nlohmann::ordered_json::array();
    for (const auto& r : p.routes) {
        auto path = nlohmann::ordered_json::array();
        for (const auto& pt : r.path) path.push_back({pt.x, pt.y});
        j["routes"].push_back({{"from", r.net.from}, {"to", r.net.to}, {"path", path}});
    }
    return j.dump(1) + "\n";
}

}  // namespace chipdse
