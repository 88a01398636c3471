#include "chipdse/cht.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace chipdse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long double kInfL = std::numeric_limits<long double>::infinity();

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void count_cmp(OpCounter* c, std::uint64_t n = 1) {
    if (c) c->comparisons += n;
}

void check_table(const StageTable& stages) {
    if (stages.empty()) throw ValidationError("stage table is empty");
    for (std::size_t s = 0; s < stages.size(); ++s) {
        if (stages[s].empty()) {
            throw InfeasibleError("stage-assignment",
                                  "stage " + std::to_string(s) + " has no feasible candidate");
        }
    }
}

AcceleratorDesign assemble(const StageTable& stages, const std::vector<std::size_t>& choice,
                           double period, double objective, Objective kind) {
    AcceleratorDesign d;
    d.choice = choice;
    d.period = period;
    d.objective = objective;
    d.kind = kind;
    for (std::size_t s = 0; s < stages.size(); ++s) {
        d.stages.push_back(stages[s][choice[s]]);
        d.stages.back().group_index = s;
    }
    return d;
}

[[noreturn]] void no_feasible() {
    throw InfeasibleError("stage-assignment", "no stage assignment satisfies the latency caps");
}

}  // namespace

std::vector<AffineSegment> make_segments(const std::vector<StageCandidate>& candidates,
                                         Objective objective) {
    std::vector<AffineSegment> out;
    out.reserve(candidates.size());
    const bool cost = is_cost_aware(objective);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        const double scale = cost ? c.dollar_cost : 1.0;
        out.push_back({c.p_static * scale, c.e_dyn * scale, c.t_cmp, i});
    }
    return out;
}

std::vector<double> candidate_latencies(const StageTable& stages, const LatencyCap& cap) {
    std::vector<double> ts;
    for (const auto& stage : stages) {
        for (const auto& c : stage) {
            if (cap.admits(c.t_cmp)) ts.push_back(c.t_cmp);
        }
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

AcceleratorDesign naive_search(const StageTable& stages, Objective objective, const LatencyCap& cap,
                               OpCounter* counter, std::uint64_t guard) {
    check_table(stages);
    std::uint64_t tuples = 1;
    for (const auto& st : stages) {
        if (__builtin_mul_overflow(tuples, static_cast<std::uint64_t>(st.size()), &tuples) ||
            tuples > guard) {
            throw ValidationError("naive enumeration exceeds the tuple guard of " +
                                  std::to_string(guard));
        }
    }
    std::vector<std::vector<AffineSegment>> segs;
    for (const auto& st : stages) segs.push_back(make_segments(st, objective));

    const std::size_t p = stages.size();
    std::vector<std::size_t> idx(p, 0), best_idx;
    double best = kInf;
    double best_t = kInf;
    while (true) {
        if (counter) ++counter->tuples;
        double t = 0.0;
        for (std::size_t s = 0; s < p; ++s) t = std::max(t, segs[s][idx[s]].activation);
        if (cap.admits(t)) {
            double sum = 0.0;
            for (std::size_t s = 0; s < p; ++s) {
                sum += segs[s][idx[s]].at(t);
                if (counter) ++counter->evaluations;
            }
            const double obj = objective_from_sum(sum, t, objective);
            count_cmp(counter);
            if (obj < best || (obj == best && t < best_t)) {
                best = obj;
                best_t = t;
                best_idx = idx;
            }
        }
        std::size_t s = 0;
        while (s < p && ++idx[s] == segs[s].size()) idx[s++] = 0;
        if (s == p) break;
    }
    if (best_idx.empty()) no_feasible();
    return assemble(stages, best_idx, best_t, best, objective);
}

AcceleratorDesign iso_latency_search(const StageTable& stages, Objective objective,
                                     const LatencyCap& cap, OpCounter* counter) {
    check_table(stages);
    std::vector<std::vector<AffineSegment>> segs;
    for (const auto& st : stages) segs.push_back(make_segments(st, objective));
    const auto ts = candidate_latencies(stages, cap);

    std::vector<std::size_t> choice(stages.size()), best_choice;
    double best = kInf;
    double best_t = kInf;
    for (double t : ts) {
        double sum = 0.0;
        bool feasible = true;
        for (std::size_t s = 0; s < segs.size(); ++s) {
            double v = kInf;
            for (std::size_t j = 0; j < segs[s].size(); ++j) {
                if (counter) ++counter->evaluations;
                count_cmp(counter);
                if (segs[s][j].activation > t) continue;
                const double x = segs[s][j].at(t);
                count_cmp(counter);
                if (x < v) {
                    v = x;
                    choice[s] = j;
                }
            }
            if (v == kInf) feasible = false;
            sum += v;
        }
        if (!feasible) continue;
        const double obj = objective_from_sum(sum, t, objective);
        count_cmp(counter);
        if (obj < best) {
            best = obj;
            best_t = t;
            best_choice = choice;
        }
    }
    if (best_choice.empty()) no_feasible();
    return assemble(stages, best_choice, best_t, best, objective);
}

// ---- persistent hull ----

int ThresholdHulls::clone(int n) {
    nodes_.push_back(nodes_[static_cast<std::size_t>(n)]);
    return static_cast<int>(nodes_.size()) - 1;
}

void ThresholdHulls::pull(int n) {
    auto& x = nodes_[static_cast<std::size_t>(n)];
    x.count = 1 + (x.left >= 0 ? nodes_[static_cast<std::size_t>(x.left)].count : 0) +
              (x.right >= 0 ? nodes_[static_cast<std::size_t>(x.right)].count : 0);
}

int ThresholdHulls::merge(int a, int b) {
    if (a < 0) return b;
    if (b < 0) return a;
    if (nodes_[static_cast<std::size_t>(a)].prio > nodes_[static_cast<std::size_t>(b)].prio) {
        const int c = clone(a);
        const int r = merge(nodes_[static_cast<std::size_t>(c)].right, b);
        nodes_[static_cast<std::size_t>(c)].right = r;
        pull(c);
        return c;
    }
    const int c = clone(b);
    const int l = merge(a, nodes_[static_cast<std::size_t>(c)].left);
    nodes_[static_cast<std::size_t>(c)].left = l;
    pull(c);
    return c;
}

void ThresholdHulls::split_by_key(int n, long double k, int& l, int& r) {
    if (n < 0) {
        l = r = -1;
        return;
    }
    count_cmp(build_counter_);
    const int c = clone(n);
    int a = -1, b = -1;
    if (nodes_[static_cast<std::size_t>(c)].k <= k) {
        split_by_key(nodes_[static_cast<std::size_t>(c)].right, k, a, b);
        nodes_[static_cast<std::size_t>(c)].right = a;
        pull(c);
        l = c;
        r = b;
    } else {
        split_by_key(nodes_[static_cast<std::size_t>(c)].left, k, a, b);
        nodes_[static_cast<std::size_t>(c)].left = b;
        pull(c);
        l = a;
        r = c;
    }
}

int ThresholdHulls::pop_first(int n) {
    const auto& x = nodes_[static_cast<std::size_t>(n)];
    if (x.left < 0) return x.right;
    const int c = clone(n);
    const int l = pop_first(nodes_[static_cast<std::size_t>(c)].left);
    nodes_[static_cast<std::size_t>(c)].left = l;
    pull(c);
    return c;
}

int ThresholdHulls::pop_last(int n) {
    const auto& x = nodes_[static_cast<std::size_t>(n)];
    if (x.right < 0) return x.left;
    const int c = clone(n);
    const int r = pop_last(nodes_[static_cast<std::size_t>(c)].right);
    nodes_[static_cast<std::size_t>(c)].right = r;
    pull(c);
    return c;
}

int ThresholdHulls::set_last_p(int n, long double p) {
    const int c = clone(n);
    if (nodes_[static_cast<std::size_t>(c)].right < 0) {
        nodes_[static_cast<std::size_t>(c)].p = p;
        return c;
    }
    const int r = set_last_p(nodes_[static_cast<std::size_t>(c)].right, p);
    nodes_[static_cast<std::size_t>(c)].right = r;
    return c;
}

int ThresholdHulls::first_of(int n) const {
    while (nodes_[static_cast<std::size_t>(n)].left >= 0) n = nodes_[static_cast<std::size_t>(n)].left;
    return n;
}

int ThresholdHulls::last_of(int n) const {
    while (nodes_[static_cast<std::size_t>(n)].right >= 0) {
        n = nodes_[static_cast<std::size_t>(n)].right;
    }
    return n;
}

void ThresholdHulls::last_two(int n, int& last, int& prev) const {
    prev = -1;
    while (nodes_[static_cast<std::size_t>(n)].right >= 0) {
        prev = n;
        n = nodes_[static_cast<std::size_t>(n)].right;
    }
    last = n;
    if (nodes_[static_cast<std::size_t>(n)].left >= 0) prev = last_of(nodes_[static_cast<std::size_t>(n)].left);
}

long double ThresholdHulls::cross(int x, int y) {
    if (y < 0) return kInfL;
    const auto& a = nodes_[static_cast<std::size_t>(x)];
    const auto& b = nodes_[static_cast<std::size_t>(y)];
    count_cmp(build_counter_);
    if (a.k == b.k) return a.m >= b.m ? kInfL : -kInfL;
    return (b.m - a.m) / (a.k - b.k);
}

// Line-container insertion (max over k*x + m with k = -slope, m = -intercept)
// carried out on split halves so every touched path is copied.
int ThresholdHulls::insert(int root, std::size_t seg) {
    const auto& s = segs_[seg];
    Node fresh;
    fresh.k = -static_cast<long double>(s.slope);
    fresh.m = -static_cast<long double>(s.intercept);
    fresh.ref = s.ref;
    fresh.seg = seg;
    fresh.prio = splitmix(seg);
    nodes_.push_back(fresh);
    const int y = static_cast<int>(nodes_.size()) - 1;

    int left = -1, right = -1;
    split_by_key(root, fresh.k, left, right);

    if (left >= 0) {
        const int x = last_of(left);
        count_cmp(build_counter_);
        if (nodes_[static_cast<std::size_t>(x)].k == fresh.k) {
            // Parallel lines: the earlier one wins ties.
            if (nodes_[static_cast<std::size_t>(x)].m >= fresh.m) return root;
            left = pop_last(left);
        }
    }

    // Drop successors the new line covers.
    while (right >= 0) {
        const int z = first_of(right);
        nodes_[static_cast<std::size_t>(y)].p = cross(y, z);
        count_cmp(build_counter_);
        if (nodes_[static_cast<std::size_t>(y)].p < nodes_[static_cast<std::size_t>(z)].p) break;
        right = pop_first(right);
    }
    if (right < 0) nodes_[static_cast<std::size_t>(y)].p = kInfL;

    bool keep_y = true;
    if (left >= 0) {
        const int x = last_of(left);
        long double xp = cross(x, y);
        count_cmp(build_counter_);
        if (xp >= nodes_[static_cast<std::size_t>(y)].p) {
            keep_y = false;
            xp = right >= 0 ? cross(x, first_of(right)) : kInfL;
        }
        left = set_last_p(left, xp);

        // Drop predecessors that no longer own an interval.
        while (true) {
            int cur = -1, prev = -1;
            last_two(left, cur, prev);
            if (prev < 0) break;
            count_cmp(build_counter_);
            if (nodes_[static_cast<std::size_t>(prev)].p < nodes_[static_cast<std::size_t>(cur)].p) break;
            left = pop_last(left);
            const int next = keep_y ? y : (right >= 0 ? first_of(right) : -1);
            left = set_last_p(left, cross(last_of(left), next));
        }
    }
    if (!keep_y) return merge(left, right);
    return merge(left, merge(y, right));
}

ThresholdHulls::ThresholdHulls(std::vector<AffineSegment> segments, OpCounter* counter)
    : segs_(std::move(segments)), build_counter_(counter) {
    for (const auto& s : segs_) {
        if (!(s.slope >= 0.0) || !(s.intercept >= 0.0) || !std::isfinite(s.slope) ||
            !std::isfinite(s.intercept)) {
            throw ValidationError("segment coefficients must be finite and nonnegative");
        }
    }
    std::vector<std::size_t> order(segs_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        count_cmp(counter);
        if (segs_[a].activation != segs_[b].activation) {
            return segs_[a].activation < segs_[b].activation;
        }
        return segs_[a].ref < segs_[b].ref;
    });
    nodes_.reserve(segs_.size() * 8);
    int root = -1;
    for (std::size_t i = 0; i < order.size(); ++i) {
        root = insert(root, order[i]);
        const double a = segs_[order[i]].activation;
        if (i + 1 == order.size() || segs_[order[i + 1]].activation != a) {
            thresholds_.push_back(a);
            roots_.push_back(root);
        }
    }
    build_counter_ = nullptr;
}

std::size_t ThresholdHulls::hull_size(std::size_t i) const {
    const int r = roots_.at(i);
    return r < 0 ? 0 : static_cast<std::size_t>(nodes_[static_cast<std::size_t>(r)].count);
}

void ThresholdHulls::collect(int n, std::vector<std::size_t>& out) const {
    if (n < 0) return;
    collect(nodes_[static_cast<std::size_t>(n)].left, out);
    out.push_back(nodes_[static_cast<std::size_t>(n)].ref);
    collect(nodes_[static_cast<std::size_t>(n)].right, out);
}

std::vector<std::size_t> ThresholdHulls::hull_refs(std::size_t i) const {
    std::vector<std::size_t> out;
    collect(roots_.at(i), out);
    return out;
}

std::optional<ThresholdHulls::Hit> ThresholdHulls::query(double t, OpCounter* counter) const {
    // Largest threshold <= t.
    std::size_t lo = 0, hi = thresholds_.size();
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        count_cmp(counter);
        if (thresholds_[mid] <= t) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo == 0) return std::nullopt;
    int n = roots_[lo - 1];

    // First node whose interval ends at or after t.
    const long double tl = t;
    int found = -1, after = -1, before = -1;
    while (n >= 0) {
        const auto& x = nodes_[static_cast<std::size_t>(n)];
        count_cmp(counter);
        if (x.p >= tl) {
            after = found;
            found = n;
            n = x.left;
        } else {
            before = n;
            n = x.right;
        }
    }
    if (const int r = nodes_[static_cast<std::size_t>(found)].right; r >= 0) after = first_of(r);

    // Crossovers are rounded, so the neighbours are checked as well.
    Hit best{0, kInf};
    bool any = false;
    for (int c : {before, found, after}) {
        if (c < 0) continue;
        const auto& s = segs_[nodes_[static_cast<std::size_t>(c)].seg];
        const double v = s.at(t);
        count_cmp(counter);
        if (!any || v < best.value || (v == best.value && s.ref < best.ref)) {
            best = {s.ref, v};
            any = true;
        }
    }
    return best;
}

ThresholdHulls build_threshold_hulls(const std::vector<AffineSegment>& segments, OpCounter* counter) {
    if (segments.empty()) throw ValidationError("cannot build hulls from zero segments");
    return ThresholdHulls(segments, counter);
}

std::optional<ThresholdHulls::Hit> query_stage_min(const ThresholdHulls& hulls, double t,
                                                   OpCounter* counter) {
    return hulls.query(t, counter);
}

AcceleratorDesign cht_search(const StageTable& stages, Objective objective, const LatencyCap& cap,
                             OpCounter* counter) {
    check_table(stages);
    std::vector<ThresholdHulls> hulls;
    hulls.reserve(stages.size());
    for (const auto& st : stages) hulls.emplace_back(make_segments(st, objective), counter);
    const auto ts = candidate_latencies(stages, cap);

    std::vector<std::size_t> choice(stages.size()), best_choice;
    double best = kInf;
    double best_t = kInf;
    for (double t : ts) {
        double sum = 0.0;
        bool feasible = true;
        for (std::size_t s = 0; s < hulls.size(); ++s) {
            const auto hit = hulls[s].query(t, counter);
            if (counter) ++counter->evaluations;
            if (!hit) {
                feasible = false;
                break;
            }
            choice[s] = hit->ref;
            sum += hit->value;
        }
        if (!feasible) continue;
        const double obj = objective_from_sum(sum, t, objective);
        count_cmp(counter);
        if (obj < best) {
            best = obj;
            best_t = t;
            best_choice = choice;
        }
    }
    if (best_choice.empty()) no_feasible();
    return assemble(stages, best_choice, best_t, best, objective);
}

AcceleratorDesign solve_stages(StageSolver solver, const StageTable& stages, Objective objective,
                               const LatencyCap& cap, OpCounter* counter) {
    switch (solver) {
        case StageSolver::Naive:
            return naive_search(stages, objective, cap, counter);
        case StageSolver::Iso:
            return iso_latency_search(stages, objective, cap, counter);
        case StageSolver::Cht:
            break;
    }
    return cht_search(stages, objective, cap, counter);
}

}  // namespace chipdse
