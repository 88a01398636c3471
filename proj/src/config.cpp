#include "chipdse/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "chipdse/format.hpp"

namespace chipdse {

namespace {

// One numeric field of a config section: how to read and write it.
struct Field {
    std::function<void(const Record&, const std::string&)> set;
    std::function<std::string()> get;
};

using Section = std::vector<std::pair<std::string, Field>>;

Field real(double& x) {
    return {[&x](const Record& r, const std::string& k) { x = r.number(k); }, [&x] { return num(x); }};
}

template <typename Int>
Field integral(Int& x) {
    return {[&x](const Record& r, const std::string& k) { x = static_cast<Int>(r.integer(k)); },
            [&x] { return std::to_string(x); }};
}

// Byte counts are written in a scaled unit so files stay readable.
Field bytes_in(std::int64_t& x, std::int64_t unit) {
    return {[&x, unit](const Record& r, const std::string& k) { x = r.integer(k) * unit; },
            [&x, unit] { return std::to_string(x / unit); }};
}

Field flag(bool& x) {
    return {[&x](const Record& r, const std::string& k) {
                const auto& v = r.str(k);
                if (v != "0" && v != "1") throw ParseError(r.where() + ": " + k + " must be 0 or 1");
                x = v == "1";
            },
            [&x] { return std::string(x ? "1" : "0"); }};
}

template <typename T, typename Parse, typename Show>
Field list(std::vector<T>& xs, Parse parse, Show show) {
    return {[&xs, parse](const Record& r, const std::string& k) {
                std::vector<T> out;
                std::stringstream ss(r.str(k));
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (item.empty()) throw ParseError(r.where() + ": empty list item in '" + k + "'");
                    out.push_back(parse(item, r.where() + " key '" + k + "'"));
                }
                xs = std::move(out);
            },
            [&xs, show] {
                std::string s;
                for (const auto& x : xs) s += (s.empty() ? "" : ",") + show(x);
                return s;
            }};
}

Field int_list(std::vector<std::int64_t>& xs) {
    return list(xs, [](const std::string& t, const std::string& ctx) { return parse_int(t, ctx); },
                [](std::int64_t v) { return std::to_string(v); });
}

Field tp_list(std::vector<int>& xs) {
    return list(xs, [](const std::string& t, const std::string& ctx) { return static_cast<int>(parse_int(t, ctx)); },
                [](int v) { return std::to_string(v); });
}

Section perf_section(PerfParams& p) {
    return {{"base_pe_side", integral(p.base_pe_side)},
            {"base_glb_kib", bytes_in(p.base_glb_bytes, kKiB)},
            {"frequency_hz", real(p.frequency_hz)},
            {"e_mac_pj", real(p.e_mac_pj)},
            {"static_power_density", real(p.static_power_density)},
            {"area_per_pe_mm2", real(p.area_per_pe_mm2)},
            {"area_per_glb_mib_mm2", real(p.area_per_glb_mib_mm2)},
            {"interchip_pj_per_bit", real(p.interchip_pj_per_bit)},
            {"memory_granule_mib", bytes_in(p.memory_granule_bytes, kMiB)}};
}

Section cost_section(CostParams& c) {
    Field bonding{[&c](const Record& r, const std::string& k) {
                      const auto& v = r.str(k);
                      if (v == "2d") {
                          c.bonding = Bonding::TwoD;
                      } else if (v == "2.5d") {
                          c.bonding = Bonding::TwoPointFiveD;
                      } else {
                          throw ParseError(r.where() + ": bonding must be 2d or 2.5d");
                      }
                  },
                  [&c] { return std::string(c.bonding == Bonding::TwoD ? "2d" : "2.5d"); }};
    return {{"wafer_cost", real(c.wafer_cost)},
            {"wafer_diameter_mm", real(c.wafer_diameter_mm)},
            {"defect_density", real(c.defect_density)},
            {"clustering_alpha", real(c.clustering_alpha)},
            {"reticle_limit_mm2", real(c.reticle_limit_mm2)},
            {"package_base", real(c.package_base)},
            {"package_per_mm2", real(c.package_per_mm2)},
            {"bonding", bonding},
            {"bonding_multiplier_2d", real(c.bonding_multiplier_2d)},
            {"bonding_multiplier_25d", real(c.bonding_multiplier_25d)},
            {"nre_per_chiplet_design", real(c.nre_per_chiplet_design)},
            {"nre_per_package_design", real(c.nre_per_package_design)},
            {"volume", real(c.volume)},
            {"networks_sharing_pool", real(c.networks_sharing_pool)}};
}

Section memory_section(MemoryModule& m) {
    return {{"bandwidth", real(m.bandwidth)},
            {"e_bit_pj", real(m.e_bit_pj)},
            {"capacity_gib", bytes_in(m.capacity_bytes, kGiB)},
            {"cost_per_gb", real(m.cost_per_gb)},
            {"static_power_w", real(m.static_power_w)}};
}

Section ga_section(GaParams& g) {
    return {{"population", integral(g.population)},
            {"generations", integral(g.generations)},
            {"mutation_rate", real(g.mutation_rate)},
            {"crossover_rate", real(g.crossover_rate)},
            {"tournament", integral(g.tournament)}};
}

Section sa_section(Config& c) {
    auto& s = c.sa;
    Field aggregation{[&c](const Record& r, const std::string& k) {
                          const auto& v = r.str(k);
                          if (v == "geomean") {
                              c.aggregation = Aggregation::GeoMean;
                          } else if (v == "worst") {
                              c.aggregation = Aggregation::WorstCase;
                          } else {
                              throw ParseError(r.where() + ": aggregation must be geomean or worst");
                          }
                      },
                      [&c] { return std::string(c.aggregation == Aggregation::GeoMean ? "geomean" : "worst"); }};
    return {{"initial_temperature", real(s.initial_temperature)},
            {"cooling", real(s.cooling)},
            {"iterations_per_level", integral(s.iterations_per_level)},
            {"temperature_floor", real(s.temperature_floor)},
            {"max_evaluations", integral(s.max_evaluations)},
            {"inner_population", integral(s.inner_ga.population)},
            {"inner_generations", integral(s.inner_ga.generations)},
            {"aggregation", aggregation}};
}

Section search_section(Config& c) {
    Field inner{[&c](const Record& r, const std::string& k) {
                    const auto& v = r.str(k);
                    if (v == "ga") {
                        c.inner = InnerSearch::Ga;
                    } else if (v == "exhaustive") {
                        c.inner = InnerSearch::Exhaustive;
                    } else {
                        throw ParseError(r.where() + ": inner must be ga or exhaustive");
                    }
                },
                [&c] { return std::string(c.inner == InnerSearch::Ga ? "ga" : "exhaustive"); }};
    Field pool{[&c](const Record& r, const std::string& k) {
                   const auto& v = r.str(k);
                   if (v == "sa") {
                       c.pool_search = PoolSearch::Sa;
                   } else if (v == "exhaustive") {
                       c.pool_search = PoolSearch::Exhaustive;
                   } else {
                       throw ParseError(r.where() + ": pool_search must be sa or exhaustive");
                   }
               },
               [&c] { return std::string(c.pool_search == PoolSearch::Sa ? "sa" : "exhaustive"); }};
    Field memories{[&c](const Record& r, const std::string& k) {
                       std::vector<MemoryModule> out;
                       std::stringstream ss(r.str(k));
                       std::string item;
                       while (std::getline(ss, item, ',')) {
                           const auto kind = parse_memory_kind(item);
                           auto it = std::find_if(c.memories.begin(), c.memories.end(),
                                                  [&](const MemoryModule& m) { return m.kind == kind; });
                           out.push_back(it != c.memories.end() ? *it : default_memory(kind));
                       }
                       c.memories = std::move(out);
                   },
                   [&c] {
                       std::string s;
                       for (const auto& m : c.memories) s += (s.empty() ? "" : ",") + std::string(to_string(m.kind));
                       return s;
                   }};
    return {{"inner", inner},
            {"pool_search", pool},
            {"pool_budget", integral(c.pool_budget)},
            {"tps", tp_list(c.tps)},
            {"batches", int_list(c.batches)},
            {"memories", memories},
            {"threads", integral(c.threads)}};
}

Section pnr_section(PnrParams& p) {
    return {{"grid_mm", real(p.grid_mm)}, {"edge_capacity", integral(p.edge_capacity)}, {"max_side", integral(p.max_side)}};
}

Section sim_section(SimSettings& s) {
    return {{"inputs", integral(s.inputs)},
            {"tile_kib", bytes_in(s.tile_bytes, kKiB)},
            {"buffer_slots", integral(s.buffer_slots)},
            {"shared_bus", flag(s.shared_bus)}};
}

Section scenario_section(ScenarioParams& p) {
    return {{"av_deadline", real(p.av_deadline)},
            {"decode_batches", int_list(p.decode_batches)},
            {"spec_tpot", real(p.spec_tpot)},
            {"k", integral(p.spec.k)},
            {"tar", real(p.spec.tar)},
            {"speedup_cap", real(p.spec.speedup_cap)}};
}

void apply_section(const Section& section, const Record& rec) {
    std::set<std::string> allowed;
    for (const auto& [key, _] : section) allowed.insert(key);
    rec.require_keys_within(allowed);
    for (const auto& [key, field] : section) {
        if (rec.has(key)) field.set(rec, key);
    }
}

std::string show_section(const std::string& head, const Section& section) {
    std::string s = head;
    for (const auto& [key, field] : section) s += " " + key + "=" + field.get();
    return s + "\n";
}

void expect_positional(const Record& rec, std::size_t n, const char* usage) {
    if (rec.positional.size() != n) throw ParseError(rec.where() + ": expected `" + usage + "`");
}

MemoryModule& memory_entry(Config& c, MemoryKind kind) {
    for (auto& m : c.memories) {
        if (m.kind == kind) return m;
    }
    c.memories.push_back(default_memory(kind));
    return c.memories.back();
}

}  // namespace

std::vector<ChipletConfig> Config::chiplet_menu() const {
    if (chiplets.empty()) return full_chiplet_menu(model.perf);
    std::vector<ChipletConfig> menu;
    for (const auto& c : chiplets) menu.push_back(make_chiplet(c.dataflow, c.pe_scale, c.glb_scale, model.perf));
    std::sort(menu.begin(), menu.end());
    return menu;
}

void Config::validate() const {
    model.cost.validate();
    if (memories.empty()) throw ValidationError("memory menu is empty");
    if (tps.empty() || std::any_of(tps.begin(), tps.end(), [](int t) { return t != 1 && t != 2; })) {
        throw ValidationError("tensor parallel menu must be drawn from {1,2}");
    }
    if (batches.empty() || std::any_of(batches.begin(), batches.end(), [](auto b) { return b < 1; })) {
        throw ValidationError("batch menu must hold positive batches");
    }
    if (pool_budget < 1) throw ValidationError("pool budget must be at least 1");
    if (threads < 1) throw ValidationError("threads must be at least 1");
    if (!(pnr.grid_mm > 0.0) || pnr.edge_capacity < 1 || pnr.max_side < 1) {
        throw ValidationError("pnr settings must be positive");
    }
    if (sim.inputs < 1 || sim.tile_bytes < 1 || sim.buffer_slots < 0) throw ValidationError("bad sim settings");
    scenario.spec.validate();
    auto menu = chiplet_menu();
    for (std::size_t i = 1; i < menu.size(); ++i) {
        if (menu[i] == menu[i - 1]) throw ValidationError("chiplet '" + menu[i].id + "' listed twice");
    }
}

bool apply_config_record(Config& c, const Record& rec) {
    const auto& k = rec.keyword;
    if (k == "perf" || k == "cost" || k == "ga" || k == "sa" || k == "search" || k == "pnr" || k == "sim" ||
        k == "scenario_params") {
        expect_positional(rec, 0, "<section> key=value...");
        if (k == "perf") apply_section(perf_section(c.model.perf), rec);
        if (k == "cost") apply_section(cost_section(c.model.cost), rec);
        if (k == "ga") apply_section(ga_section(c.ga), rec);
        if (k == "sa") apply_section(sa_section(c), rec);
        if (k == "search") apply_section(search_section(c), rec);
        if (k == "pnr") apply_section(pnr_section(c.pnr), rec);
        if (k == "sim") apply_section(sim_section(c.sim), rec);
        if (k == "scenario_params") apply_section(scenario_section(c.scenario), rec);
        return true;
    }
    if (k == "memory") {
        expect_positional(rec, 1, "memory <KIND> key=value...");
        apply_section(memory_section(memory_entry(c, parse_memory_kind(rec.positional[0]))), rec);
        return true;
    }
    if (k == "affinity") {
        expect_positional(rec, 2, "affinity <op-kind> <dataflow> value=<x>");
        rec.require_keys_within({"value"});
        const double v = rec.number("value");
        if (!(v > 0.0 && v <= 1.0)) throw ValidationError(rec.where() + ": affinity must lie in (0, 1]");
        c.model.affinity.set(parse_op_kind(rec.positional[0]), parse_dataflow(rec.positional[1]), v);
        return true;
    }
    if (k == "chiplet") {
        expect_positional(rec, 1, "chiplet <dataflow> pe=<scale> glb=<scale>");
        rec.require_keys_within({"pe", "glb"});
        c.chiplets.push_back(make_chiplet(parse_dataflow(rec.positional[0]), static_cast<int>(rec.integer("pe")),
                                          static_cast<int>(rec.integer("glb")), c.model.perf));
        return true;
    }
    return false;
}

Config parse_config(std::string_view text, Config base) {
    for (const auto& rec : parse_records(text)) {
        if (!apply_config_record(base, rec)) {
            throw ParseError(rec.where() + ": unknown config record '" + rec.keyword + "'");
        }
    }
    base.validate();
    return base;
}

Config load_config(const std::filesystem::path& path, Config base) {
    return parse_config(read_text_file(path.string()), std::move(base));
}

std::string dump_config(const Config& cfg) {
    // Sections bind by reference; work on a copy so the getters stay valid.
    Config c = cfg;
    std::string s;
    s += show_section("perf", perf_section(c.model.perf));
    s += show_section("cost", cost_section(c.model.cost));
    for (auto& m : c.memories) s += show_section("memory " + std::string(to_string(m.kind)), memory_section(m));
    for (int k = 0; k < kNumOpKinds; ++k) {
        for (int d = 0; d < kNumDataflows; ++d) {
            const auto op = static_cast<OpKind>(k);
            const auto df = static_cast<Dataflow>(d);
            s += "affinity " + std::string(to_string(op)) + " " + std::string(to_string(df)) +
                 " value=" + num(c.model.affinity.at(op, df)) + "\n";
        }
    }
    for (const auto& ch : c.chiplets) {
        s += "chiplet " + std::string(to_string(ch.dataflow)) + " pe=" + std::to_string(ch.pe_scale) +
             " glb=" + std::to_string(ch.glb_scale) + "\n";
    }
    s += show_section("ga", ga_section(c.ga));
    s += show_section("sa", sa_section(c));
    // Thread count never changes results, so it stays out of the echo.
    auto search = search_section(c);
    std::erase_if(search, [](const auto& f) { return f.first == "threads"; });
    s += show_section("search", search);
    s += show_section("pnr", pnr_section(c.pnr));
    s += show_section("sim", sim_section(c.sim));
    s += show_section("scenario_params", scenario_section(c.scenario));
    return s;
}

RunManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
    RunManifest m;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    const auto records = parse_records(text);
    // The config file goes first so inline records override it wherever they sit.
    for (const auto& rec : records) {
        if (rec.keyword != "config") continue;
        expect_positional(rec, 1, "config <path>");
        rec.require_keys_within({});
        if (m.config_path) throw ParseError(rec.where() + ": only one config file per manifest");
        m.config_path = resolve(rec.positional[0]);
        m.config = load_config(*m.config_path);
    }
    for (const auto& rec : records) {
        const auto& k = rec.keyword;
        if (k == "config") continue;
        if (k == "workload") {
            expect_positional(rec, 1, "workload <path> [batches=..] [max_e2e=..] [max_period=..]");
            rec.require_keys_within({"batches", "max_e2e", "max_period"});
            WorkloadEntry w;
            w.path = resolve(rec.positional[0]);
            if (rec.has("batches")) {
                std::vector<std::int64_t> b;
                int_list(b).set(rec, "batches");
                w.batches = b;
            }
            w.limits.max_e2e = rec.number_or("max_e2e", w.limits.max_e2e);
            w.limits.max_period = rec.number_or("max_period", w.limits.max_period);
            if (!(w.limits.max_e2e > 0.0) || !(w.limits.max_period > 0.0)) {
                throw ValidationError(rec.where() + ": latency limits must be positive");
            }
            m.workloads.push_back(std::move(w));
        } else if (k == "objective" || k == "scenario" || k == "seed" || k == "out" || k == "cost_mode") {
            expect_positional(rec, 1, "<keyword> <value>");
            rec.require_keys_within({});
            const auto& v = rec.positional[0];
            if (k == "objective") m.objective = parse_objective(v);
            if (k == "scenario") m.scenario = parse_scenario_kind(v);
            if (k == "seed") m.seed = static_cast<std::uint64_t>(parse_int(v, rec.where()));
            if (k == "out") m.out_dir = resolve(v);
            if (k == "cost_mode") m.cost_mode = parse_cost_mode(v);
        } else if (!apply_config_record(m.config, rec)) {
            throw ParseError(rec.where() + ": unknown manifest record '" + k + "'");
        }
    }
    m.config.validate();
    if (m.workloads.empty()) throw ValidationError("manifest lists no workloads");
    return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
    auto m = parse_manifest(read_text_file(path.string()), path.parent_path());
    m.source = path;
    return m;
}

std::string dump_manifest(const RunManifest& m) {
    std::string s;
    for (const auto& w : m.workloads) {
        s += "workload " + w.path.filename().string();
        if (w.batches) {
            std::string b;
            for (auto x : *w.batches) b += (b.empty() ? "" : ",") + std::to_string(x);
            s += " batches=" + b;
        }
        if (std::isfinite(w.limits.max_e2e)) s += " max_e2e=" + num(w.limits.max_e2e);
        if (std::isfinite(w.limits.max_period)) s += " max_period=" + num(w.limits.max_period);
        s += "\n";
    }
    s += "objective " + std::string(to_string(m.objective)) + "\n";
    if (m.scenario) s += "scenario " + std::string(to_string(*m.scenario)) + "\n";
    s += "seed " + std::to_string(m.seed) + "\n";
    s += "cost_mode " + std::string(to_string(m.cost_mode)) + "\n";
    s += dump_config(m.config);
    return s;
}

}  // namespace chipdse
