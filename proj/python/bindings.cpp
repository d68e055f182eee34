#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bpvei/analysis.hpp"
#include "bpvei/cli.hpp"
#include "bpvei/exact.hpp"
#include "bpvei/limitlab.hpp"
#include "bpvei/montecarlo.hpp"
#include "bpvei/pgf.hpp"

namespace py = pybind11;
using namespace bpvei;

namespace {

BpveiModel model_from(const py::object& spec) {
    if (py::isinstance<py::str>(spec)) {
        const std::string s = spec.cast<std::string>();
        if (s.rfind("preset:", 0) == 0) return preset(s.substr(7));
        return build_model(nlohmann::json::parse(s));
    }
    // any JSON-serializable mapping
    const std::string text = py::module_::import("json").attr("dumps")(spec).cast<std::string>();
    return build_model(nlohmann::json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_bpvei, m) {
    m.doc() = "Branching processes in varying environment with immigration";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

    m.def("presets", &preset_names);
    m.def("process_pgf", [](const py::object& model, Generation n, double s) { return process_pgf(model_from(model), n, s); },
          py::arg("model"), py::arg("n"), py::arg("s"));
    m.def("compose_offspring",
          [](const py::object& model, Generation k, Generation n, double s) { return compose_offspring(model_from(model), k, n, s); },
          py::arg("model"), py::arg("k"), py::arg("n"), py::arg("s"));
    m.def("exact_survival_curve",
          [](const py::object& model, Generation horizon) { return exact_survival_curve(model_from(model), horizon); },
          py::arg("model"), py::arg("horizon"));
    m.def("shape_function",
          [](const py::object& model, Generation k, double s) { return shape_function(model_from(model), k, s); },
          py::arg("model"), py::arg("k"), py::arg("s"));
    m.def("iterated_shape_residual",
          [](const py::object& model, Generation k, Generation n, double s, bool relative) {
              const BpveiModel m = model_from(model);
              return relative ? iterated_shape_residual_relative(m, k, n, s) : iterated_shape_residual(m, k, n, s);
          },
          py::arg("model"), py::arg("k"), py::arg("n"), py::arg("s"), py::arg("relative") = false);
    m.def(
        "propagate",
        [](const py::object& model, Generation n, Generation cutoff, double tol) {
            PropagateOptions o;
            o.cutoff = cutoff;
            o.tail_tol = tol;
            const TruncatedPmf p = propagate(model_from(model), n, o);
            return py::make_tuple(p.probs, p.tail, p.cutoff);
        },
        py::arg("model"), py::arg("n"), py::arg("cutoff") = 2048, py::arg("tol") = 1e-10,
        "Exact pmf of Z_n: (probs, tail, cutoff).");
    m.def("mean_sequence", [](const py::object& model, Generation h) { return mean_sequence(model_from(model), h); });
    m.def("variance_sequence", [](const py::object& model, Generation h) { return variance_sequence(model_from(model), h); });
    m.def("variance_sequence_printed",
          [](const py::object& model, Generation h) { return variance_sequence_printed(model_from(model), h); });
    m.def("normalizer", [](const py::object& model, Generation h) { return normalizer(model_from(model), h).a; });
    m.def("criticality", [](const py::object& model, Generation h) {
        return to_string(criticality_classify(model_from(model), dyadic_horizons(h)).verdict);
    });
    m.def("extinction", [](const py::object& model, Generation h) {
        return to_string(extinction_conditions(model_from(model), h).verdict);
    });
    m.def(
        "survival_curve",
        [](const py::object& model, Generation horizon, std::size_t reps, std::uint64_t seed, unsigned threads) {
            SimConfig c;
            c.horizon = horizon;
            c.replications = reps;
            c.seed = seed;
            c.threads = threads;
            std::vector<double> est;
            for (const auto& p : survival_curve(model_from(model), c).points) est.push_back(p.estimate);
            return est;
        },
        py::arg("model"), py::arg("horizon"), py::arg("reps"), py::arg("seed") = 1, py::arg("threads") = 1,
        "Estimates of P[Z_n > 0] for n = 1..horizon.");
    m.def(
        "endpoint_sample",
        [](const py::object& model, Generation n, std::size_t reps, std::uint64_t seed, const std::string& engine) {
            const BpveiModel mod = model_from(model);
            if (engine == "decomposition") return decomposition_sample(mod, n, reps, seed).values;
            if (engine != "direct") throw ValidationError("engine must be direct or decomposition");
            return endpoint_sample(mod, n, reps, seed).values;
        },
        py::arg("model"), py::arg("n"), py::arg("reps"), py::arg("seed") = 1, py::arg("engine") = "direct");
    m.def("gamma_cdf", &gamma_cdf, py::arg("shape"), py::arg("x"));
    m.def("ks_statistic", [](std::vector<double> sample, double shape) {
        std::sort(sample.begin(), sample.end());
        return ks_statistic(sample, [shape](double x) { return gamma_cdf(shape, x); });
    });
    m.def(
        "gamma_limit",
        [](const py::object& model, std::vector<Generation> ns, std::size_t reps, std::uint64_t seed, std::vector<double> lambdas) {
            GammaLimitOptions o;
            o.n_list = std::move(ns);
            o.replications = reps;
            o.seed = seed;
            o.lambdas = std::move(lambdas);
            return verify_gamma_limit(model_from(model), o).to_json().dump();
        },
        py::arg("model"), py::arg("n"), py::arg("reps"), py::arg("seed") = 1,
        py::arg("lambdas") = std::vector<double>{0.5, 1.0, 2.0}, "JSON report text.");
    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::dispatch(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        "Run a CLI subcommand in-process: (exit code, stdout, stderr).");
}
