// chipdse: command-line front end. Every subcommand writes a result bundle
// under --out and prints the files it wrote.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "chipdse/commands.hpp"

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> objective;
    std::optional<std::string> cost_mode;
    std::optional<std::string> out;
    std::optional<int> threads;
};

chipdse::RunManifest manifest_with_overrides(const std::string& path, const Globals& g) {
    auto m = chipdse::load_manifest(path);
    if (g.seed) m.seed = *g.seed;
    if (g.objective) m.objective = chipdse::parse_objective(*g.objective);
    if (g.cost_mode) m.cost_mode = chipdse::parse_cost_mode(*g.cost_mode);
    if (g.out) m.out_dir = *g.out;
    if (g.threads) m.config.threads = *g.threads;
    m.config.validate();
    return m;
}

void emit(const std::filesystem::path& dir, const chipdse::Bundle& bundle) {
    chipdse::write_bundle(dir, bundle);
    for (const auto& [rel, _] : bundle) std::cout << (dir / rel).string() << "\n";
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chiplet accelerator design-space exploration"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "RNG seed (overrides the manifest)");
    app.add_option("--objective", g.objective, "energy, ec, edp or edpc")
        ->check(CLI::IsMember({"energy", "ec", "edp", "edpc"}));
    app.add_option("--cost-mode", g.cost_mode, "re or amortized")->check(CLI::IsMember({"re", "amortized"}));
    app.add_option("--out", g.out, "output directory (overrides the manifest)");
    app.add_option("--threads", g.threads, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
    bool dump_defaults = false;
    app.add_flag("--dump-config", dump_defaults, "print the built-in config and exit");

    std::string manifest_path;
    auto* dse = app.add_subcommand("dse", "pool search, designs, layouts and metrics");
    dse->add_option("manifest", manifest_path, "run manifest")->required()->check(CLI::ExistingFile);

    std::string paradigms = "homogeneous-asic-all,homogeneous-nsic,heterogeneous-pool,heterogeneous-unconstrained";
    auto* compare = app.add_subcommand("compare", "compare architectural paradigms");
    compare->add_option("manifest", manifest_path, "run manifest")->required()->check(CLI::ExistingFile);
    compare->add_option("--paradigms", paradigms, "comma-separated paradigms");

    std::string volumes = "1e6,2e6,3e6";
    auto* cost = app.add_subcommand("cost", "die, memory, packaging and NRE breakdown");
    cost->add_option("manifest", manifest_path, "run manifest")->required()->check(CLI::ExistingFile);
    cost->add_option("--volumes", volumes, "comma-separated production volumes");

    std::string table_path, solver = "cht";
    double max_period = INFINITY, period_factor = 1.0, max_e2e = INFINITY, e2e_factor = 1.0;
    auto* solve = app.add_subcommand("solve-stages", "pick one candidate per stage from a candidate table");
    solve->add_option("table", table_path, "CSV: stage,t_cmp,e_dyn,p_static,dollar_cost")
        ->required()
        ->check(CLI::ExistingFile);
    solve->add_option("--solver", solver, "cht, iso or naive")->check(CLI::IsMember({"cht", "iso", "naive"}));
    solve->add_option("--max-period", max_period, "cap on period * period-factor");
    solve->add_option("--period-factor", period_factor)->check(CLI::PositiveNumber);
    solve->add_option("--max-e2e", max_e2e, "cap on period * e2e-factor");
    solve->add_option("--e2e-factor", e2e_factor)->check(CLI::PositiveNumber);

    bool trace = false;
    auto* sim = app.add_subcommand("simulate", "event-driven pipeline simulation");
    sim->add_option("manifest", manifest_path, "run manifest")->required()->check(CLI::ExistingFile);
    sim->add_flag("--trace", trace, "write per-tile event traces");

    bool dump = false;
    auto* pnr = app.add_subcommand("pnr", "place and route each network's design");
    pnr->add_option("manifest", manifest_path, "run manifest")->required()->check(CLI::ExistingFile);
    pnr->add_flag("--dump", dump, "write text and JSON layouts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (dump_defaults) {
            std::cout << chipdse::dump_config(chipdse::Config{});
            return 0;
        }
        if (app.got_subcommand(solve)) {
            std::ifstream in(table_path);
            std::stringstream buf;
            buf << in.rdbuf();
            const auto table = chipdse::parse_stage_table(buf.str());
            const auto kind = solver == "cht"   ? chipdse::StageSolver::Cht
                              : solver == "iso" ? chipdse::StageSolver::Iso
                                                : chipdse::StageSolver::Naive;
            const auto obj = chipdse::parse_objective(g.objective.value_or("ec"));
            chipdse::LatencyCap cap{max_period, period_factor, max_e2e, e2e_factor};
            emit(g.out.value_or("out"), chipdse::cmd_solve_stages(table, kind, obj, cap));
            return 0;
        }
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return 1;
        }
        const auto m = manifest_with_overrides(manifest_path, g);
        chipdse::Bundle bundle;
        if (app.got_subcommand(dse)) bundle = chipdse::cmd_dse(m);
        if (app.got_subcommand(compare)) {
            std::vector<chipdse::Paradigm> ps;
            for (const auto& p : split(paradigms)) ps.push_back(chipdse::parse_paradigm(p));
            bundle = chipdse::cmd_compare(m, ps);
        }
        if (app.got_subcommand(cost)) {
            std::vector<double> vs;
            for (const auto& v : split(volumes)) vs.push_back(chipdse::parse_double(v, "--volumes"));
            bundle = chipdse::cmd_cost(m, vs);
        }
        if (app.got_subcommand(sim)) bundle = chipdse::cmd_simulate(m, trace);
        if (app.got_subcommand(pnr)) bundle = chipdse::cmd_pnr(m, dump);
        emit(m.out_dir, bundle);
        return 0;
    } catch (const chipdse::InfeasibleError& e) {
        std::cerr << "infeasible [" << e.layer() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
