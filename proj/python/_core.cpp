#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chipdse/commands.hpp"

namespace py = pybind11;
using namespace chipdse;

namespace {

RunManifest manifest(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> objective,
                     std::optional<std::string> cost_mode, std::optional<int> threads) {
    auto m = load_manifest(path);
    if (seed) m.seed = *seed;
    if (objective) m.objective = parse_objective(*objective);
    if (cost_mode) m.cost_mode = parse_cost_mode(*cost_mode);
    if (threads) m.config.threads = *threads;
    m.config.validate();
    return m;
}

StageSolver solver_of(const std::string& s) {
    if (s == "cht") return StageSolver::Cht;
    if (s == "iso") return StageSolver::Iso;
    if (s == "naive") return StageSolver::Naive;
    throw ValidationError("solver must be cht, iso or naive");
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "Chiplet accelerator design-space exploration";

    static py::exception<InfeasibleError> infeasible(mod, "InfeasibleError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InfeasibleError& e) {
            py::object err = py::handle(infeasible.ptr())(std::string(e.what()));
            err.attr("layer") = e.layer();
            PyErr_SetObject(infeasible.ptr(), err.ptr());
        } catch (const ParseError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const ValidationError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    mod.def(
        "dse",
        [](const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> objective,
           std::optional<std::string> cost_mode, std::optional<int> threads) {
            return cmd_dse(manifest(path, seed, objective, cost_mode, threads));
        },
        py::arg("manifest"), py::kw_only(), py::arg("seed") = py::none(), py::arg("objective") = py::none(),
        py::arg("cost_mode") = py::none(), py::arg("threads") = py::none(),
        "Pool search, per-network designs, layouts and metrics; returns {relative path: file text}.");
    mod.def(
        "compare",
        [](const std::string& path, std::vector<std::string> paradigms, std::optional<std::uint64_t> seed,
           std::optional<std::string> objective, std::optional<std::string> cost_mode, std::optional<int> threads) {
            std::vector<Paradigm> ps;
            for (const auto& p : paradigms) ps.push_back(parse_paradigm(p));
            if (ps.empty()) ps = all_paradigms();
            return cmd_compare(manifest(path, seed, objective, cost_mode, threads), ps);
        },
        py::arg("manifest"), py::arg("paradigms") = std::vector<std::string>{}, py::kw_only(),
        py::arg("seed") = py::none(), py::arg("objective") = py::none(), py::arg("cost_mode") = py::none(),
        py::arg("threads") = py::none());
    mod.def(
        "cost",
        [](const std::string& path, std::vector<double> volumes, std::optional<std::uint64_t> seed,
           std::optional<std::string> objective, std::optional<int> threads) {
            return cmd_cost(manifest(path, seed, objective, std::nullopt, threads), volumes);
        },
        py::arg("manifest"), py::arg("volumes") = std::vector<double>{1e6, 2e6, 3e6}, py::kw_only(),
        py::arg("seed") = py::none(), py::arg("objective") = py::none(), py::arg("threads") = py::none());
    mod.def(
        "simulate",
        [](const std::string& path, bool trace, std::optional<std::uint64_t> seed, std::optional<int> threads) {
            return cmd_simulate(manifest(path, seed, std::nullopt, std::nullopt, threads), trace);
        },
        py::arg("manifest"), py::arg("trace") = false, py::kw_only(), py::arg("seed") = py::none(),
        py::arg("threads") = py::none());
    mod.def(
        "pnr",
        [](const std::string& path, bool dump, std::optional<std::uint64_t> seed, std::optional<int> threads) {
            return cmd_pnr(manifest(path, seed, std::nullopt, std::nullopt, threads), dump);
        },
        py::arg("manifest"), py::arg("dump") = false, py::kw_only(), py::arg("seed") = py::none(),
        py::arg("threads") = py::none());
    mod.def(
        "solve_stages",
        [](const std::string& csv, const std::string& solver, const std::string& objective, double max_period,
           double period_factor) {
            LatencyCap cap;
            cap.max_period = max_period;
            cap.period_factor = period_factor;
            return cmd_solve_stages(parse_stage_table(csv), solver_of(solver), parse_objective(objective), cap);
        },
        py::arg("table_csv"), py::arg("solver") = "cht", py::arg("objective") = "ec",
        py::arg("max_period") = std::numeric_limits<double>::infinity(), py::arg("period_factor") = 1.0);

    mod.def("default_config", [] { return dump_config(Config{}); }, "Built-in config in text form.");
    mod.def(
        "die_cost", [](double area) { return die_cost(area); }, py::arg("area_mm2"));
    mod.def(
        "amortized_nre",
        [](std::size_t eco, double volume) {
            CostParams p;
            p.volume = volume;
            return amortized_nre(eco, p);
        },
        py::arg("ecosystem_size"), py::arg("volume"));
    mod.def("perimeter_scaling", &perimeter_scaling, py::arg("n"));
    mod.def(
        "spec_decode_speedup",
        [](double t_draft, double t_verify, double t_target_token, int k, double tar, double cap) {
            SpecDecodeTimes t;
            t.t_draft = t_draft;
            t.t_verify = t_verify;
            t.t_target_token = t_target_token;
            SpecDecodeConfig c;
            c.k = k;
            c.tar = tar;
            c.speedup_cap = cap;
            return spec_decode_eval(t, c).speedup;
        },
        py::arg("t_draft"), py::arg("t_verify"), py::arg("t_target_token"), py::arg("k") = 5, py::arg("tar") = 5.6,
        py::arg("cap") = 2.0);
}
