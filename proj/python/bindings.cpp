#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "malcal/cli.hpp"
#include "malcal/errors.hpp"
#include "malcal/experiments.hpp"
#include "malcal/identities.hpp"
#include "malcal/kernel.hpp"
#include "malcal/noise.hpp"
#include "malcal/path.hpp"
#include "malcal/rng.hpp"
#include "malcal/walsh.hpp"

namespace py = pybind11;
using namespace malcal;

namespace {

py::dict report_dict(const experiments::ConvergenceReport& r) {
    py::dict d;
    d["n_values"] = r.n_values;
    d["mse"] = r.mse;
    d["ci_low"] = r.ci_low;
    d["ci_high"] = r.ci_high;
    d["slope"] = r.slope;
    d["intercept"] = r.intercept;
    d["r2"] = r.r_squared;
    d["paths"] = r.paths;
    d["seed"] = r.seed;
    d["wall_time_seconds"] = r.wall_time_seconds;
    return d;
}

std::vector<py::dict> results_list(const std::vector<identities::CheckResult>& rs) {
    std::vector<py::dict> out;
    for (const auto& r : rs) {
        py::dict d;
        d["check"] = r.name;
        d["b"] = r.b;
        d["instances"] = r.instances;
        d["failures"] = r.failures;
        d["max_error"] = r.max_error;
        d["passed"] = r.passed();
        out.push_back(d);
    }
    return out;
}

DiscreteKernel order_one(const std::vector<double>& values, int n) {
    return DiscreteKernel::from_values(n, values);
}

}  // namespace

PYBIND11_MODULE(_malcal, m) {
    m.doc() = "Discrete Malliavin calculus on random walks";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<CostGuardError>(m, "CostGuardError", PyExc_RuntimeError);
    py::register_exception<CouplingUnderrun>(m, "CouplingUnderrun", PyExc_RuntimeError);

    py::class_<NoiseSpec>(m, "NoiseSpec")
        .def_property_readonly("atoms",
                               [](const NoiseSpec& s) {
                                   std::vector<std::pair<double, double>> out;
                                   for (const auto& a : s.atoms()) out.emplace_back(a.value, a.probability);
                                   return out;
                               })
        .def_property_readonly("label", &NoiseSpec::label)
        .def("is_binary", &NoiseSpec::is_binary)
        .def("moment", &NoiseSpec::moment, py::arg("k"));
    m.def("binary_noise", &binary_noise, py::arg("b"));
    m.def(
        "custom_noise",
        [](const std::vector<std::pair<double, double>>& atoms, const std::string& label) {
            std::vector<Atom> a;
            for (const auto& [v, p] : atoms) a.push_back({v, p});
            return custom_noise(std::move(a), label);
        },
        py::arg("atoms"), py::arg("label") = "custom");
    m.def(
        "sample",
        [](const NoiseSpec& spec, std::size_t count, std::uint64_t seed) {
            Rng rng = make_stream(seed, 0, 0);
            return malcal::sample(spec, rng, count);
        },
        py::arg("spec"), py::arg("count"), py::arg("seed") = 42);

    m.def(
        "sample_exit",
        [](double alpha, double beta, std::size_t count, std::uint64_t seed) {
            std::vector<double> times;
            std::vector<bool> upper;
            for (std::size_t j = 0; j < count; ++j) {
                Rng rng = make_stream(seed, 0, j);
                const ExitSample e = sample_exit(alpha, beta, rng);
                times.push_back(e.time);
                upper.push_back(e.upper);
            }
            return py::make_tuple(times, upper);
        },
        py::arg("alpha"), py::arg("beta"), py::arg("count"), py::arg("seed") = 42,
        "Exact exit times from (-alpha, beta) and whether the upper barrier was hit.");
    m.def("exit_time_density", &exit_time_density, py::arg("alpha"), py::arg("beta"), py::arg("t"),
          py::arg("tol") = 1e-14);
    m.def(
        "simulate_skeleton",
        [](double b, int n, std::size_t steps, std::uint64_t seed) {
            Rng rng = make_stream(seed, 0, 0);
            const Skeleton s = simulate_skeleton_binary(b, n, steps, rng);
            py::dict d;
            d["increments"] = s.walk.increments;
            d["passage_times"] = s.passage_times;
            return d;
        },
        py::arg("b"), py::arg("n"), py::arg("steps"), py::arg("seed") = 42);

    py::class_<walsh::WalshVector>(m, "WalshVector")
        .def_property_readonly("horizon", &walsh::WalshVector::horizon)
        .def_property_readonly("b", &walsh::WalshVector::b)
        .def("coeffs",
             [](const walsh::WalshVector& x) {
                 py::dict out;
                 for (const auto& [mask, c] : x.coeffs()) {
                     out[py::tuple(py::cast(walsh::members(mask)))] = c;
                 }
                 return out;
             })
        .def("coeff", [](const walsh::WalshVector& x, const std::vector<int>& subset) {
            return x.coeff(walsh::subset_of(subset));
        })
        .def("expectation", &walsh::WalshVector::expectation)
        .def("inner", &walsh::WalshVector::inner)
        .def("values", &walsh::WalshVector::values)
        .def("evaluate", [](const walsh::WalshVector& x, const std::vector<double>& w) { return x.evaluate(w); })
        .def("__add__", [](const walsh::WalshVector& a, const walsh::WalshVector& b) { return a + b; })
        .def("__mul__", [](const walsh::WalshVector& a, const walsh::WalshVector& b) {
            return walsh::multiply(a, b);
        });
    m.def(
        "walsh_from_values",
        [](const std::vector<double>& values, int horizon, double b) {
            return walsh::from_values(values, horizon, b);
        },
        py::arg("values"), py::arg("horizon"), py::arg("b"),
        "values[k] is X at the outcome whose bit i-1 of k selects xi_i = b.");
    m.def("walsh_malliavin", &walsh::malliavin_derivative, py::arg("x"), py::arg("i"), py::arg("n"));
    m.def(
        "walsh_skorokhod",
        [](const std::vector<walsh::WalshVector>& z, int n) { return walsh::skorokhod(z, n); },
        py::arg("z"), py::arg("n"));
    m.def("walsh_clark_ocone", &walsh::clark_ocone, py::arg("x"), py::arg("i"), py::arg("n"));
    m.def(
        "walsh_wick_exponential",
        [](const std::vector<double>& f, int n, double b) {
            return walsh::wick_exponential(order_one(f, n), n, static_cast<int>(f.size()), b);
        },
        py::arg("f"), py::arg("n"), py::arg("b"));
    m.def(
        "chaos_norms",
        [](const walsh::WalshVector& x, int n) {
            std::vector<double> out;
            for (const auto& k : walsh::chaos_coefficients(x, n)) out.push_back(k.squared_norm());
            return out;
        },
        py::arg("x"), py::arg("n"), "Squared L2_n norms of the chaos kernels, k = 0..M.");
    m.def("tail_mass", &experiments::tail_mass, py::arg("x"), py::arg("m"));
    m.def("weighted_tail_mass", &experiments::weighted_tail_mass, py::arg("x"), py::arg("m"));

    m.def(
        "fit_loglog_slope",
        [](const std::vector<double>& xs, const std::vector<double>& ys) {
            const auto f = experiments::fit_loglog_slope(xs, ys);
            return py::make_tuple(f.slope, f.intercept, f.r_squared);
        },
        py::arg("xs"), py::arg("ys"));
    m.def(
        "skorokhod_convergence",
        [](double b, const std::vector<int>& n_values, std::size_t paths, int fine_factor,
           std::uint64_t seed, int threads) {
            experiments::SkorokhodOptions o{b, n_values, paths, fine_factor, seed, threads};
            experiments::ConvergenceReport r;
            {
                py::gil_scoped_release release;
                r = experiments::skorokhod_convergence_experiment(o);
            }
            return report_dict(r);
        },
        py::arg("b"), py::arg("n_values"), py::arg("paths") = 10000, py::arg("fine_factor") = 64,
        py::arg("seed") = 42, py::arg("threads") = 0);
    m.def(
        "chaos_estimate",
        [](const std::string& functional, int k, int n, double b, std::size_t paths,
           std::uint64_t seed) {
            experiments::ChaosOptions o;
            o.functional = experiments::parse_chaos_functional(functional);
            o.k = k;
            o.n = n;
            o.b = b;
            o.paths = paths;
            o.seed = seed;
            const auto r = experiments::chaos_estimation_experiment(o);
            py::dict d;
            d["l2_error"] = r.l2_error;
            d["bias"] = r.bias;
            d["mc_noise"] = r.mc_noise;
            d["mc_noise_scale"] = r.mc_noise_scale;
            return d;
        },
        py::arg("functional"), py::arg("k"), py::arg("n"), py::arg("b") = 1.0,
        py::arg("paths") = 10000, py::arg("seed") = 42);
    m.def(
        "s_transform_exact",
        [](const std::string& g, const std::string& h, int n) {
            return experiments::s_transform_exact(StepFunction::parse(g), StepFunction::parse(h), n);
        },
        py::arg("g"), py::arg("h"), py::arg("n"), "Step functions as 'level:left:right;...'.");

    m.def(
        "run_identity_suite",
        [](int m_max, int instances, double tolerance, std::uint64_t seed) {
            identities::SuiteOptions o;
            o.max_horizon = m_max;
            o.instances = instances;
            o.tolerance = tolerance;
            o.seed = seed;
            return results_list(identities::run_identity_suite(o));
        },
        py::arg("m") = 10, py::arg("instances") = 100, py::arg("tolerance") = 1e-10,
        py::arg("seed") = 42);
    m.def(
        "run_equivalence_suite",
        [](int m_max, int instances, double tolerance, std::uint64_t seed) {
            identities::SuiteOptions o;
            o.max_horizon = m_max;
            o.instances = instances;
            o.tolerance = tolerance;
            o.seed = seed;
            return results_list(identities::run_equivalence_suite(o));
        },
        py::arg("m") = 8, py::arg("instances") = 100, py::arg("tolerance") = 1e-10,
        py::arg("seed") = 42);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::parse_and_run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs one CLI invocation; returns (exit code, stdout, stderr).");
}
