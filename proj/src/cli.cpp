#include "malcal/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "malcal/errors.hpp"
#include "malcal/experiments.hpp"
#include "malcal/identities.hpp"
#include "malcal/kernel.hpp"
#include "malcal/noise.hpp"
#include "malcal/path.hpp"
#include "malcal/rng.hpp"

namespace malcal::cli {

namespace {

using nlohmann::ordered_json;

struct Settings {
    std::uint64_t seed = 42;
    int threads = 0;
    std::string output;
    std::string format = "csv";
    std::optional<double> b;
    std::string atoms;
    std::vector<int> n_list;
    std::size_t paths = 0;
    int fine_factor = 64;
    bool full_scale = false;
    std::string functional = "B1";
    int k = 1;
    int n = 16;
    int steps = 0;
    int m = 8;
    int instances = 100;
    double tolerance = 1e-10;
    int grid = 8;
    std::size_t inner = 256;
    std::string g = "1:0:1";
    std::string h = "1:0:1";
};

// Thrown for invalid argument values detected after CLI11 parsing.
struct ArgumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

NoiseSpec resolve_noise(const Settings& s) {
    if (s.b && !s.atoms.empty()) throw ArgumentError("--b and --atoms are mutually exclusive");
    if (s.atoms.empty()) return binary_noise(s.b.value_or(1.0));
    std::vector<Atom> atoms;
    std::stringstream ss(s.atoms);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ArgumentError("atom '" + item + "' is not value:probability");
        try {
            atoms.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
        } catch (const std::logic_error&) {
            throw ArgumentError("atom '" + item + "' is not value:probability");
        }
    }
    return custom_noise(std::move(atoms), "atoms(" + s.atoms + ")");
}

double require_binary(const NoiseSpec& spec, const std::string& command) {
    if (!spec.is_binary()) throw ArgumentError(command + " needs binary noise");
    return spec.binary_b();
}

ordered_json noise_json(const NoiseSpec& spec) {
    ordered_json j;
    j["label"] = spec.label();
    ordered_json atoms = ordered_json::array();
    for (const auto& a : spec.atoms()) atoms.push_back({a.value, a.probability});
    j["atoms"] = atoms;
    return j;
}

void require_n_list(const Settings& s) {
    if (s.n_list.empty()) throw CLI::RequiredError("--n-list");
    for (std::size_t j = 0; j < s.n_list.size(); ++j) {
        if (s.n_list[j] < 1) throw ArgumentError("--n-list entries must be positive");
        if (j > 0 && s.n_list[j] <= s.n_list[j - 1]) {
            throw ArgumentError("--n-list must be strictly ascending");
        }
    }
}

// Result sink: the --output file, or `out` when none is given.
class Sink {
  public:
    Sink(const std::string& path, std::ostream& fallback) : path_(path) {
        if (path.empty() || path == "-") {
            stream_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw std::runtime_error("cannot open output file '" + path + "'");
            stream_ = file_.get();
        }
    }
    std::ostream& stream() { return *stream_; }
    bool is_file() const { return file_ != nullptr; }

    // Summary JSON goes to `<output>.summary.json`, or to `err` for stdout runs.
    void summary(const std::string& json, std::ostream& err) const {
        if (!file_) {
            err << json << '\n';
            return;
        }
        std::ofstream side(path_ + ".summary.json", std::ios::binary);
        if (!side) throw std::runtime_error("cannot open summary file '" + path_ + ".summary.json'");
        side << json << '\n';
    }

  private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

std::string summary_string(const experiments::ConvergenceReport& r) {
    std::ostringstream os;
    experiments::write_summary_json(os, r);
    std::string s = os.str();
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

void emit_report(const experiments::ConvergenceReport& r, const Settings& s, std::ostream& out,
                 std::ostream& err) {
    Sink sink(s.output, out);
    if (s.format == "json") {
        experiments::write_report_json(sink.stream(), r);
    } else {
        experiments::write_report_csv(sink.stream(), r);
        sink.summary(summary_string(r), err);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "wall time: %.3f s\n", r.wall_time_seconds);
    err << buf;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int run_skorokhod(Settings s, ordered_json& echo, std::ostream& out, std::ostream& err) {
    if (s.full_scale) {
        if (s.n_list.empty()) {
            for (int n = 4; n <= (1 << 15); n *= 2) s.n_list.push_back(n);
        }
        if (s.paths == 0) s.paths = 10000;
    }
    require_n_list(s);
    experiments::SkorokhodOptions o;
    o.b = require_binary(resolve_noise(s), "skorokhod-convergence");
    o.n_values = s.n_list;
    o.paths = s.paths ? s.paths : 10000;
    o.fine_factor = s.fine_factor;
    o.seed = s.seed;
    o.threads = s.threads;
    echo["b"] = o.b;
    echo["n_list"] = o.n_values;
    echo["paths"] = o.paths;
    echo["fine_factor"] = o.fine_factor;
    err << echo.dump() << '\n';
    emit_report(experiments::skorokhod_convergence_experiment(o), s, out, err);
    return 0;
}

int run_clark_ocone(const Settings& s, ordered_json& echo, std::ostream& out, std::ostream& err) {
    require_n_list(s);
    experiments::ClarkOconeOptions o;
    o.b = require_binary(resolve_noise(s), "clark-ocone");
    o.n_values = s.n_list;
    o.paths = s.paths ? s.paths : 2000;
    o.fine_factor = s.fine_factor;
    o.grid_points = s.grid;
    o.inner_samples = s.inner;
    o.seed = s.seed;
    o.threads = s.threads;
    echo["b"] = o.b;
    echo["n_list"] = o.n_values;
    echo["paths"] = o.paths;
    echo["fine_factor"] = o.fine_factor;
    echo["grid"] = o.grid_points;
    echo["inner"] = o.inner_samples;
    err << echo.dump() << '\n';
    emit_report(experiments::clark_ocone_convergence_experiment(o), s, out, err);
    return 0;
}

int run_chaos(const Settings& s, ordered_json& echo, std::ostream& out, std::ostream& err) {
    experiments::ChaosOptions o;
    o.functional = experiments::parse_chaos_functional(s.functional);
    o.b = require_binary(resolve_noise(s), "chaos-estimate");
    o.k = s.k;
    o.n = s.n;
    o.paths = s.paths ? s.paths : 10000;
    o.seed = s.seed;
    o.threads = s.threads;
    echo["functional"] = s.functional;
    echo["b"] = o.b;
    echo["k"] = o.k;
    echo["n"] = o.n;
    echo["paths"] = o.paths;
    err << echo.dump() << '\n';
    const auto r = experiments::chaos_estimation_experiment(o);
    ordered_json summary;
    summary["functional"] = s.functional;
    summary["n"] = r.n;
    summary["k"] = r.k;
    summary["paths"] = r.paths;
    summary["seed"] = s.seed;
    summary["l2_error"] = r.l2_error;
    summary["bias"] = r.bias;
    summary["mc_noise"] = r.mc_noise;
    summary["mc_noise_scale"] = r.mc_noise_scale;
    Sink sink(s.output, out);
    if (s.format == "json") {
        ordered_json cells = ordered_json::array();
        r.estimate.for_each_tuple([&](const Index& t, double v) { cells.push_back({{"index", t}, {"value", v}}); });
        summary["cells"] = cells;
        sink.stream() << summary.dump(2) << '\n';
    } else {
        write_kernel_csv(sink.stream(), r.estimate);
        sink.summary(summary.dump(), err);
    }
    return 0;
}

int run_s_transform(const Settings& s, ordered_json& echo, std::ostream& out, std::ostream& err) {
    require_n_list(s);
    const NoiseSpec spec = resolve_noise(s);
    experiments::STransformOptions o;
    o.g = StepFunction::parse(s.g);
    o.h = StepFunction::parse(s.h);
    o.n_values = s.n_list;
    o.paths = s.paths;
    o.seed = s.seed;
    echo["noise"] = noise_json(spec);
    echo["g"] = o.g.to_string();
    echo["h"] = o.h.to_string();
    echo["n_list"] = o.n_values;
    echo["paths"] = o.paths;
    err << echo.dump() << '\n';
    const auto rows = experiments::s_transform_convergence_experiment(o, spec);
    const bool monotone = experiments::differences_monotone(rows);
    Sink sink(s.output, out);
    ordered_json summary;
    summary["target"] = rows.empty() ? 0.0 : rows.front().target;
    summary["monotone"] = monotone;
    summary["paths"] = o.paths;
    summary["seed"] = s.seed;
    if (s.format == "json") {
        ordered_json arr = ordered_json::array();
        for (const auto& r : rows) {
            arr.push_back({{"n", r.n}, {"exact", r.exact}, {"target", r.target}, {"abs_diff", r.abs_diff},
                           {"mc_estimate", r.mc_estimate}, {"mc_std_error", r.mc_std_error}});
        }
        summary["rows"] = arr;
        sink.stream() << summary.dump(2) << '\n';
    } else {
        auto& os = sink.stream();
        os << "n,exact,target,abs_diff,mc_estimate,mc_std_error\n";
        for (const auto& r : rows) {
            os << r.n << ',' << fmt(r.exact) << ',' << fmt(r.target) << ',' << fmt(r.abs_diff) << ',';
            if (o.paths > 0) os << fmt(r.mc_estimate) << ',' << fmt(r.mc_std_error);
            else os << ',';
            os << '\n';
        }
        sink.summary(summary.dump(), err);
    }
    return 0;
}

int run_exact_check(const Settings& s, bool b_given, ordered_json& echo, std::ostream& out,
                    std::ostream& err) {
    identities::SuiteOptions o;
    o.max_horizon = s.m;
    o.instances = s.instances;
    o.tolerance = s.tolerance;
    o.seed = s.seed;
    if (b_given) o.b_values = {require_binary(resolve_noise(s), "exact-check")};
    echo["m"] = o.max_horizon;
    echo["instances"] = o.instances;
    echo["tolerance"] = o.tolerance;
    echo["b_values"] = o.b_values;
    err << echo.dump() << '\n';
    auto results = identities::run_identity_suite(o);
    const auto equivalence = identities::run_equivalence_suite(o);
    results.insert(results.end(), equivalence.begin(), equivalence.end());
    Sink sink(s.output, out);
    if (s.format == "json") {
        ordered_json arr = ordered_json::array();
        for (const auto& r : results) {
            arr.push_back({{"check", r.name}, {"b", r.b}, {"instances", r.instances},
                           {"failures", r.failures}, {"max_error", r.max_error}, {"passed", r.passed()}});
        }
        sink.stream() << arr.dump(2) << '\n';
    } else {
        identities::write_results_csv(sink.stream(), results);
    }
    const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed(); });
    if (!ok) err << "exact-check: some identities failed\n";
    return ok ? 0 : 1;
}

int run_simulate(const Settings& s, ordered_json& echo, std::ostream& out, std::ostream& err) {
    const NoiseSpec spec = resolve_noise(s);
    if (s.n < 1) throw ArgumentError("--n must be positive");
    const std::size_t steps = static_cast<std::size_t>(s.steps > 0 ? s.steps : s.n);
    const std::size_t paths = s.paths ? s.paths : 1;
    echo["noise"] = noise_json(spec);
    echo["n"] = s.n;
    echo["steps"] = steps;
    echo["paths"] = paths;
    err << echo.dump() << '\n';
    Sink sink(s.output, out);
    const std::uint64_t domain =
        experiments::stream_domain(experiments::StreamTag::simulate, static_cast<std::uint64_t>(s.n));
    for (std::size_t p = 0; p < paths; ++p) {
        Rng rng = make_stream(s.seed, domain, p);
        if (spec.is_binary()) {
            const Skeleton sk = simulate_skeleton_binary(spec.binary_b(), s.n, steps, rng);
            write_path_csv(sink.stream(), sk.walk, sk.passage_times, spec.binary_b(), s.seed);
        } else {
            const WalkPath w = simulate_walk(spec, s.n, steps, rng);
            write_path_csv(sink.stream(), w, {}, std::nan(""), s.seed);
        }
    }
    return 0;
}

}  // namespace

int parse_and_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete Malliavin calculus on random walks", "malcal"};
    app.set_config("--config", "", "Read options from a key = value file (flags take precedence)");
    app.require_subcommand(1);
    app.fallthrough();

    Settings s;
    app.add_option("--seed", s.seed, "Master seed")->envname("MALCAL_SEED");
    app.add_option("--threads", s.threads, "Worker threads (0: machine parallelism)");
    app.add_option("--output,-o", s.output, "Output file (default: stdout)");
    app.add_option("--format", s.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    auto* b_opt = app.add_option("--b", s.b, "Binary noise parameter b > 0");
    app.add_option("--atoms", s.atoms, "Custom noise atoms as value:probability,...");
    app.add_option("--n-list", s.n_list, "Ascending list of n")->delimiter(',');
    auto* paths_opt = app.add_option("--paths", s.paths, "Number of Monte Carlo paths");
    app.add_option("--fine-factor", s.fine_factor, "Fine-grid refinement K of the coupling")
        ->check(CLI::PositiveNumber);
    app.add_flag("--full-scale", s.full_scale, "Use n = 4..2^15 and 10000 paths");
    app.add_option("--functional", s.functional, "Chaos functional: B1, B1sq-1, wick-exp");
    app.add_option("--k", s.k, "Chaos order")->check(CLI::NonNegativeNumber);
    app.add_option("--n", s.n, "Mesh parameter n")->check(CLI::PositiveNumber);
    app.add_option("--steps", s.steps, "Walk steps (default: n)")->check(CLI::NonNegativeNumber);
    app.add_option("--m", s.m, "Horizon of the exact checks")->check(CLI::PositiveNumber);
    app.add_option("--instances", s.instances, "Random instances per check")->check(CLI::PositiveNumber);
    app.add_option("--tolerance", s.tolerance, "Relative tolerance of the exact checks")
        ->check(CLI::PositiveNumber);
    app.add_option("--grid", s.grid, "Number of t-grid points")->check(CLI::PositiveNumber);
    app.add_option("--inner", s.inner, "Inner samples of nested Monte Carlo")->check(CLI::PositiveNumber);
    app.add_option("--g-step", s.g, "Step function g as level:left:right;...");
    app.add_option("--h-step", s.h, "Step function h as level:left:right;...");

    auto* sko = app.add_subcommand("skorokhod-convergence", "Strong L2 rate of the Skorokhod integral example");
    auto* chaos = app.add_subcommand("chaos-estimate", "Monte Carlo chaos kernel estimate");
    auto* clark = app.add_subcommand("clark-ocone", "Clark-Ocone derivative convergence for B_1^2");
    auto* stf = app.add_subcommand("s-transform", "S-transform of a Wick exponential");
    auto* exact = app.add_subcommand("exact-check", "Exact identity and equivalence checks");
    auto* sim = app.add_subcommand("simulate-paths", "Simulate walk paths with passage times");
    for (auto* sub : {sko, chaos, clark, stf, exact, sim}) sub->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    ordered_json echo;
    const std::string command = app.get_subcommands().front()->get_name();
    echo["command"] = command;
    echo["seed"] = s.seed;
    echo["threads"] = s.threads;
    echo["output"] = s.output.empty() ? "-" : s.output;
    echo["format"] = s.format;
    try {
        if (paths_opt->count() > 0 && s.paths == 0) throw ArgumentError("--paths must be positive");
        if (command == "skorokhod-convergence") return run_skorokhod(s, echo, out, err);
        if (command == "chaos-estimate") return run_chaos(s, echo, out, err);
        if (command == "clark-ocone") return run_clark_ocone(s, echo, out, err);
        if (command == "s-transform") return run_s_transform(s, echo, out, err);
        if (command == "exact-check") return run_exact_check(s, b_opt->count() > 0, echo, out, err);
        return run_simulate(s, echo, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace malcal::cli
