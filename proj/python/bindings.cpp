#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "setsim/campaign.hpp"
#include "setsim/cli.hpp"

#include <sstream>

namespace py = pybind11;
using namespace setsim;

namespace {

CampaignConfig make_config(std::uint64_t seed, std::size_t max_samples, std::size_t min_samples, double target,
                           const std::string& policy, unsigned workers) {
    CampaignConfig cfg;
    cfg.rng_seed = seed;
    cfg.max_samples = max_samples;
    cfg.min_samples = min_samples;
    cfg.stderr_target = target;
    cfg.policy = CapturePolicy::parse(policy);
    cfg.workers = workers;
    return cfg;
}

Circuit sequential(const Circuit& c) { return c.flops().empty() ? wrap_combinational(c) : c; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "single-event transient fault injection";

    static py::exception<Error> error_type(m, "SetsimError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
            exc.attr("code") = e.code();
            exc.attr("exit_code") = static_cast<int>(e.kind());
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    py::class_<Circuit>(m, "Circuit")
        .def_property_readonly("name", &Circuit::name)
        .def_property_readonly("num_inputs", [](const Circuit& c) { return c.primary_inputs().size(); })
        .def_property_readonly("num_outputs", [](const Circuit& c) { return c.primary_outputs().size(); })
        .def_property_readonly("num_gates", [](const Circuit& c) { return c.gates().size(); })
        .def_property_readonly("num_flops", [](const Circuit& c) { return c.flops().size(); })
        .def("to_bench", [](const Circuit& c) { return to_bench(c); })
        .def("__repr__", [](const Circuit& c) {
            std::ostringstream os;
            os << "<Circuit " << c.name() << ": " << c.gates().size() << " gates, " << c.flops().size() << " flops>";
            return os.str();
        });

    m.def("parse_bench", [](const std::string& text, const std::string& name) { return parse_bench(text, name); },
          py::arg("text"), py::arg("name") = "");
    m.def("load_bench", &load_bench_file, py::arg("path"));
    m.def("wrap_combinational", &wrap_combinational);
    m.def("levelize", &levelize);
    m.def("validate", [](const std::string& text) {
        Diagnostics d = validate(parse_bench_unchecked(text));
        auto rows = [](const std::vector<Diagnostic>& v) {
            py::list out;
            for (const Diagnostic& x : v)
                out.append(py::dict(py::arg("code") = x.code, py::arg("message") = x.message,
                                    py::arg("line") = x.location.line, py::arg("column") = x.location.column));
            return out;
        };
        return py::dict(py::arg("errors") = rows(d.errors), py::arg("warnings") = rows(d.warnings));
    }, py::arg("text"), "Structural diagnostics for bench source text.");

    m.def("bundled_profiles", &bundled_profile_names);
    m.def("clock_period", [](const Circuit& c, const std::string& tech) {
        return clock_period(sequential(c), resolve_profile(tech));
    }, py::arg("circuit"), py::arg("tech") = "65nm-like");

    m.def("classify", [](std::size_t e1, std::size_t e2) { return std::string(to_string(classify(e1, e2))); });
    m.def("standard_error", &standard_error, py::arg("p"), py::arg("n"));

    m.def(
        "run_campaign",
        [](const Circuit& c, const std::string& tech, const std::string& stimulus, std::uint64_t seed,
           std::size_t max_samples, std::size_t min_samples, double target, const std::string& policy,
           unsigned workers) {
            CampaignConfig cfg = make_config(seed, max_samples, min_samples, target, policy, workers);
            CampaignResult r;
            {
                py::gil_scoped_release release;
                CampaignContext ctx(sequential(c), resolve_profile(tech), resolve_stimulus(stimulus));
                r = run_campaign(ctx, cfg);
            }
            std::ostringstream log;
            write_sample_log(log, r.log);
            return py::make_tuple(stats_to_json(r.stats), log.str());
        },
        py::arg("circuit"), py::arg("tech") = "65nm-like", py::arg("stimulus") = "random:1000:1", py::arg("seed") = 1,
        py::arg("max_samples") = 100000, py::arg("min_samples") = 100, py::arg("stderr_target") = 0.1,
        py::arg("capture_policy") = "instant", py::arg("workers") = 1,
        "Returns (stats JSON text, sample log CSV text).");

    m.def(
        "run_oracle",
        [](const Circuit& c, const std::string& tech, const std::string& stimulus, std::size_t t_grid,
           unsigned workers) {
            py::gil_scoped_release release;
            CampaignContext ctx(sequential(c), resolve_profile(tech), resolve_stimulus(stimulus));
            return stats_to_json(exhaustive_campaign(ctx, t_grid, workers));
        },
        py::arg("circuit"), py::arg("tech") = "65nm-like", py::arg("stimulus") = "random:1000:1",
        py::arg("t_grid") = 200, py::arg("workers") = 1);

    m.def("recompute_stats", [](const std::string& stats_json, const std::string& log_csv) {
        std::istringstream in(log_csv);
        return stats_to_json(stats_from_log(read_sample_log(in), stats_from_json(stats_json)));
    });

    m.def("main", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int rc = run_cli(args, out, err);
        return py::make_tuple(rc, out.str(), err.str());
    }, py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");
}
