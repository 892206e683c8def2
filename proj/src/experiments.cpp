#include "malcal/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "malcal/errors.hpp"
#include "malcal/lattice.hpp"
#include "malcal/parallel.hpp"
#include "malcal/path.hpp"
#include "malcal/rng.hpp"

namespace malcal::experiments {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct MeanCi {
    double mean;
    double low;
    double high;
};

// mean +- 1.96 sd / sqrt(L), with both sums formed by pairwise summation.
MeanCi mean_with_ci(std::span<const double> values) {
    const double count = static_cast<double>(values.size());
    const double mean = pairwise_sum(values) / count;
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = (values[i] - mean) * (values[i] - mean);
    const double var = values.size() > 1 ? pairwise_sum(dev) / (count - 1.0) : 0.0;
    const double half = 1.96 * std::sqrt(var / count);
    return {mean, mean - half, mean + half};
}

void check_n_ladder(const std::vector<int>& n_values) {
    if (n_values.empty()) throw ValidationError("n list is empty");
    for (std::size_t j = 0; j < n_values.size(); ++j) {
        if (n_values[j] < 1) throw ValidationError("n values must be positive");
        if (j > 0 && n_values[j] <= n_values[j - 1]) {
            throw ValidationError("n list must be strictly ascending");
        }
    }
}

void finish_report(ConvergenceReport& report) {
    if (report.n_values.size() >= 3 &&
        std::all_of(report.mse.begin(), report.mse.end(), [](double v) { return v > 0.0; })) {
        std::vector<double> xs(report.n_values.begin(), report.n_values.end());
        const LogLogFit fit = fit_loglog_slope(xs, report.mse);
        report.slope = fit.slope;
        report.intercept = fit.intercept;
        report.r_squared = fit.r_squared;
    } else {
        report.slope = report.intercept = report.r_squared = std::nan("");
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int sign_half(int i, int n) { return 2 * i <= n ? 1 : -1; }

}  // namespace

std::uint64_t stream_domain(StreamTag tag, std::uint64_t n) {
    return (static_cast<std::uint64_t>(tag) << 32) | (n & 0xffffffffULL);
}

LogLogFit fit_loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ValidationError("xs and ys differ in length");
    if (xs.size() < 3) throw ValidationError("log-log fit needs at least 3 points");
    const std::size_t m = xs.size();
    std::vector<double> lx(m), ly(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (!(xs[j] > 0.0) || !(ys[j] > 0.0)) {
            throw ValidationError("log-log fit needs strictly positive values");
        }
        lx[j] = std::log(xs[j]);
        ly[j] = std::log(ys[j]);
    }
    const double mx = pairwise_sum(lx) / static_cast<double>(m);
    const double my = pairwise_sum(ly) / static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        sxx += (lx[j] - mx) * (lx[j] - mx);
        sxy += (lx[j] - mx) * (ly[j] - my);
        syy += (ly[j] - my) * (ly[j] - my);
    }
    if (sxx == 0.0) throw ValidationError("log-log fit needs at least two distinct xs");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double r = ly[j] - (intercept + slope * lx[j]);
        ss_res += r * r;
    }
    const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return {slope, intercept, r2};
}

// --- Skorokhod experiment ----------------------------------------------------------

DiscreteProcessFn example_integrand(int n) {
    if (n < 2 || n % 2 != 0) throw ValidationError("the example integrand needs even n >= 2");
    std::vector<RandomVariableFn> components;
    components.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        if (i == n) {
            components.emplace_back(n, [](Outcome) { return 0.0; }, "Z_n");
            continue;
        }
        const double s = sign_half(i, n);
        components.emplace_back(
            n,
            [n, i, s](Outcome w) {
                double total = 0.0, head = 0.0;
                for (int j = 0; j < n; ++j) {
                    total += w[static_cast<std::size_t>(j)];
                    if (j < n - i) head += w[static_cast<std::size_t>(j)];
                }
                return s * (total * head / n - (1.0 - static_cast<double>(i) / n));
            },
            "Z_" + std::to_string(i));
    }
    return DiscreteProcessFn(std::move(components));
}

double example_discrete_skorokhod(std::span<const double> xi, double b, int n) {
    if (n < 2 || n % 2 != 0) throw ValidationError("n must be even and >= 2");
    if (xi.size() < static_cast<std::size_t>(n)) throw ValidationError("outcome shorter than n");
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (int j = 0; j < n; ++j) prefix[j + 1] = prefix[j] + xi[j];
    const double rn = std::sqrt(static_cast<double>(n));
    const double lo = -1.0 / b;
    const double weight = rn * b / (b * b + 1.0);
    const double s_n = prefix[n];
    double sum = 0.0;
    for (int i = 1; i <= n - 1; ++i) {
        const double s = sign_half(i, n);
        const double s_head = prefix[n - i];
        const double centre = 1.0 - static_cast<double>(i) / n;
        const bool in_head = i <= n - i;
        const double x = xi[i - 1];
        // Z_i with coordinate i moved by d.
        auto z = [&](double d) {
            return s * ((s_n + d) * (s_head + (in_head ? d : 0.0)) / n - centre);
        };
        const double zi = z(0.0);
        const double dz = weight * (z(b - x) - z(lo - x));
        sum += zi * x / rn - x * x * dz / n;
    }
    return sum;
}

double example_reference_skorokhod(double b_half, double b_one) {
    return b_one * b_half * b_half - 0.5 * b_one - b_half;
}

ConvergenceReport skorokhod_convergence_experiment(const SkorokhodOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    check_n_ladder(options.n_values);
    for (int n : options.n_values) {
        if (n % 2 != 0) throw ValidationError("n = " + std::to_string(n) + " is odd; i/n = 1/2 must be a lattice point");
    }
    if (options.paths < 100) throw ValidationError("at least 100 paths are required");
    if (!(options.b > 0.0)) throw ValidationError("b must be positive");
    if (options.fine_factor < 1) throw ValidationError("fine factor must be >= 1");

    ConvergenceReport report;
    report.paths = options.paths;
    report.seed = options.seed;
    const std::vector<double> bm_times{0.5, 1.0};
    for (int n : options.n_values) {
        std::vector<double> err(options.paths);
        const std::uint64_t domain = stream_domain(StreamTag::skorokhod, static_cast<std::uint64_t>(n));
        parallel_for(options.paths, options.threads, [&](std::size_t p) {
            Rng rng = make_stream(options.seed, domain, p);
            const CoupledPath path = simulate_coupled_binary(
                options.b, n, static_cast<std::size_t>(n), bm_times, rng, {options.fine_factor, 0.0});
            const double discrete = example_discrete_skorokhod(path.walk.increments, options.b, n);
            const double exact = example_reference_skorokhod(path.bm_values[0], path.bm_values[1]);
            err[p] = (discrete - exact) * (discrete - exact);
        });
        const MeanCi m = mean_with_ci(err);
        report.n_values.push_back(n);
        report.mse.push_back(m.mean);
        report.ci_low.push_back(m.low);
        report.ci_high.push_back(m.high);
    }
    finish_report(report);
    report.wall_time_seconds = seconds_since(start);
    return report;
}

// --- chaos estimation ---------------------------------------------------------------

ChaosFunctional parse_chaos_functional(const std::string& label) {
    if (label == "B1") return ChaosFunctional::brownian_end;
    if (label == "B1sq-1") return ChaosFunctional::square_minus_one;
    if (label == "wick-exp") return ChaosFunctional::wick_exponential;
    throw ValidationError("unknown functional '" + label + "' (expected B1, B1sq-1 or wick-exp)");
}

std::string to_string(ChaosFunctional f) {
    switch (f) {
        case ChaosFunctional::brownian_end: return "B1";
        case ChaosFunctional::square_minus_one: return "B1sq-1";
        case ChaosFunctional::wick_exponential: return "wick-exp";
    }
    return "?";
}

double chaos_functional_value(ChaosFunctional f, std::span<const double> xi, int n) {
    if (xi.size() < static_cast<std::size_t>(n)) throw ValidationError("outcome shorter than n");
    const double rn = std::sqrt(static_cast<double>(n));
    switch (f) {
        case ChaosFunctional::brownian_end:
        case ChaosFunctional::square_minus_one: {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += xi[j];
            const double w = s / rn;
            return f == ChaosFunctional::brownian_end ? w : w * w - 1.0;
        }
        case ChaosFunctional::wick_exponential: {
            double p = 1.0;
            for (int j = 0; j < n; ++j) p *= 1.0 + xi[j] / rn;
            return p;
        }
    }
    return 0.0;
}

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int j = 2; j <= k; ++j) f *= j;
    return f;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
    return std::round(c);
}

// All k-subsets of {1..n} in lexicographic order.
std::vector<Index> sorted_subsets(int n, int k) {
    std::vector<Index> out;
    if (k > n) return out;
    Index cur(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) cur[j] = j + 1;
    for (;;) {
        out.push_back(cur);
        int pos = k - 1;
        while (pos >= 0 && cur[pos] == n - k + pos + 1) --pos;
        if (pos < 0) break;
        ++cur[pos];
        for (int j = pos + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

DiscreteKernel kernel_on_subsets(int k, int n, const std::vector<Index>& subsets,
                                 const std::vector<double>& values) {
    DiscreteKernel f(k, n, true);
    for (std::size_t s = 0; s < subsets.size(); ++s) f.set(subsets[s], values[s]);
    if (k >= 2) f.mark_off_diagonal();
    return f;
}

}  // namespace

DiscreteKernel exact_chaos_kernel(ChaosFunctional f, int k, int n, double b) {
    if (k < 0) throw ValidationError("chaos order must be >= 0");
    if (n < 1) throw ValidationError("n must be >= 1");
    if (binomial(n, k) > static_cast<double>(kEnumerationLimit)) {
        throw CostGuardError("too many cells for an order-" + std::to_string(k) + " kernel");
    }
    const auto subsets = sorted_subsets(n, k);
    double level = 0.0;
    switch (f) {
        case ChaosFunctional::brownian_end: level = k == 1 ? 1.0 : 0.0; break;
        case ChaosFunctional::square_minus_one:
            if (k == 1) level = (b - 1.0 / b) / std::sqrt(static_cast<double>(n));
            if (k == 2) level = 1.0;
            break;
        case ChaosFunctional::wick_exponential: level = 1.0 / factorial(k); break;
    }
    return kernel_on_subsets(k, n, subsets, std::vector<double>(subsets.size(), level));
}

TensorStep target_chaos_kernel(ChaosFunctional f, int k) {
    if (k < 0) throw ValidationError("chaos order must be >= 0");
    switch (f) {
        case ChaosFunctional::brownian_end:
            return k == 1 ? TensorStep::cube(1, 0.0, 1.0) : TensorStep(k);
        case ChaosFunctional::square_minus_one:
            return k == 2 ? TensorStep::cube(2, 0.0, 1.0) : TensorStep(k);
        case ChaosFunctional::wick_exponential:
            return TensorStep::cube(k, 0.0, 1.0, 1.0 / factorial(k));
    }
    return TensorStep(k);
}

ChaosEstimate chaos_estimation_experiment(const ChaosOptions& options) {
    const int n = options.n;
    const int k = options.k;
    if (n < 1) throw ValidationError("n must be >= 1");
    if (k < 0) throw ValidationError("chaos order must be >= 0");
    if (options.paths < 2) throw ValidationError("at least 2 paths are required");
    if (!(options.b > 0.0)) throw ValidationError("b must be positive");
    if (binomial(n, k) > static_cast<double>(kEnumerationLimit)) {
        throw CostGuardError("too many cells for an order-" + std::to_string(k) + " kernel");
    }
    const NoiseSpec spec = binary_noise(options.b);
    const auto subsets = sorted_subsets(n, k);
    const std::size_t cells = subsets.size();
    const double scale = std::pow(static_cast<double>(n), 0.5 * k) / factorial(k);
    const std::uint64_t domain = stream_domain(StreamTag::chaos, static_cast<std::uint64_t>(n));

    // Fixed chunks of paths; partial sums are combined in chunk order.
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (options.paths + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> sums(chunks), sq_sums(chunks);
    parallel_for(chunks, options.threads, [&](std::size_t c) {
        std::vector<double> sum(cells, 0.0), sq(cells, 0.0);
        const std::size_t end = std::min(options.paths, (c + 1) * kChunk);
        for (std::size_t p = c * kChunk; p < end; ++p) {
            Rng rng = make_stream(options.seed, domain, p);
            const std::vector<double> xi = sample(spec, rng, static_cast<std::size_t>(n));
            const double x = chaos_functional_value(options.functional, xi, n);
            for (std::size_t s = 0; s < cells; ++s) {
                double y = x;
                for (int i : subsets[s]) y *= xi[static_cast<std::size_t>(i - 1)];
                sum[s] += y;
                sq[s] += y * y;
            }
        }
        sums[c] = std::move(sum);
        sq_sums[c] = std::move(sq);
    });

    const double count = static_cast<double>(options.paths);
    std::vector<double> values(cells);
    double noise_sq = 0.0;
    for (std::size_t s = 0; s < cells; ++s) {
        double total = 0.0, total_sq = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) {
            total += sums[c][s];
            total_sq += sq_sums[c][s];
        }
        const double mean = total / count;
        const double var = std::max(0.0, (total_sq - count * mean * mean) / (count - 1.0));
        values[s] = scale * mean;
        noise_sq += factorial(k) * scale * scale * var / count;
    }
    noise_sq /= std::pow(static_cast<double>(n), k);

    ChaosEstimate out;
    out.n = n;
    out.k = k;
    out.paths = options.paths;
    out.estimate = kernel_on_subsets(k, n, subsets, values);
    out.exact = exact_chaos_kernel(options.functional, k, n, options.b);
    const TensorStep target = target_chaos_kernel(options.functional, k);
    out.l2_error = embed(out.estimate).distance(target);
    out.bias = embed(out.exact).distance(target);
    out.mc_noise = difference(out.estimate, out.exact).norm();
    out.mc_noise_scale = std::sqrt(noise_sq);
    return out;
}

// --- Clark-Ocone experiment -----------------------------------------------------------

ConvergenceReport clark_ocone_convergence_experiment(const ClarkOconeOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    check_n_ladder(options.n_values);
    if (options.paths < 2) throw ValidationError("at least 2 paths are required");
    if (!(options.b > 0.0)) throw ValidationError("b must be positive");
    if (options.fine_factor < 1) throw ValidationError("fine factor must be >= 1");
    if (options.grid_points < 1) throw ValidationError("t-grid needs at least one point");
    if (options.inner_samples < 2) throw ValidationError("at least 2 inner samples are required");

    const NoiseSpec spec = binary_noise(options.b);
    const int grid = options.grid_points;
    std::vector<double> times(static_cast<std::size_t>(grid));
    for (int j = 1; j <= grid; ++j) times[j - 1] = static_cast<double>(j) / grid;

    ConvergenceReport report;
    report.paths = options.paths;
    report.seed = options.seed;
    for (int n : options.n_values) {
        const RandomVariableFn x(
            n,
            [n](Outcome w) {
                double s = 0.0;
                for (double v : w) s += v;
                return s * s / n;
            },
            "B1^2");
        const std::uint64_t domain = stream_domain(StreamTag::clark_ocone, static_cast<std::uint64_t>(n));
        std::vector<double> err(options.paths);
        parallel_for(options.paths, options.threads, [&](std::size_t p) {
            Rng rng = make_stream(options.seed, domain, p);
            const CoupledPath path = simulate_coupled_binary(
                options.b, n, static_cast<std::size_t>(n), times, rng, {options.fine_factor, 0.0});
            const auto& inc = path.walk.increments;
            double total = 0.0;
            for (int j = 1; j <= grid; ++j) {
                const int i = static_cast<int>((static_cast<long long>(n) * j + grid - 1) / grid);
                const std::span<const double> prefix(inc.data(), static_cast<std::size_t>(i - 1));
                const double reference = 2.0 * path.bm_values[j - 1];
                double e2;
                if (lattice::clark_ocone_exact_feasible(spec, n, i)) {
                    const double d = lattice::clark_ocone(x, i, prefix, spec, n) - reference;
                    e2 = d * d;
                } else {
                    const auto est = lattice::clark_ocone_mc(x, i, prefix, spec, n,
                                                             options.inner_samples, rng);
                    const double d = est.value - reference;
                    e2 = d * d - est.std_error * est.std_error;
                }
                total += e2;
            }
            err[p] = total / grid;
        });
        const MeanCi m = mean_with_ci(err);
        report.n_values.push_back(n);
        report.mse.push_back(m.mean);
        report.ci_low.push_back(m.low);
        report.ci_high.push_back(m.high);
    }
    finish_report(report);
    report.wall_time_seconds = seconds_since(start);
    return report;
}

// --- S-transform ------------------------------------------------------------------------

double s_transform_exact(const StepFunction& g, const StepFunction& h, int n) {
    const DiscreteKernel gn = discretize(g, n);
    const DiscreteKernel hn = discretize(h, n);
    double prod = 1.0;
    for (const auto& [key, gv] : gn.entries()) prod *= 1.0 + gv * hn.value(key) / n;
    return prod;
}

std::vector<STransformRow> s_transform_convergence_experiment(const STransformOptions& options,
                                                              const NoiseSpec& spec) {
    check_n_ladder(options.n_values);
    if (options.paths == 1) throw ValidationError("Monte Carlo estimates need at least 2 paths");
    const double target = std::exp(options.g.inner(options.h));
    std::vector<STransformRow> rows;
    for (int n : options.n_values) {
        STransformRow row;
        row.n = n;
        row.exact = s_transform_exact(options.g, options.h, n);
        row.target = target;
        row.abs_diff = std::abs(row.exact - target);
        row.paths = options.paths;
        if (options.paths > 0) {
            const DiscreteKernel hn = discretize(options.h, n);
            const RandomVariableFn x(
                std::max(1, hn.max_index()),
                [hn, n](Outcome w) { return lattice::wick_exponential(hn, w, n); }, "wick-exp(h)");
            Rng rng = make_stream(options.seed, stream_domain(StreamTag::s_transform, static_cast<std::uint64_t>(n)), 0);
            const auto est = lattice::s_transform_estimate(x, options.g, n, spec, options.paths, rng);
            row.mc_estimate = est.value;
            row.mc_std_error = est.std_error;
        }
        rows.push_back(row);
    }
    return rows;
}

bool differences_monotone(std::span<const STransformRow> rows) {
    for (std::size_t j = 1; j < rows.size(); ++j) {
        if (rows[j].abs_diff > rows[j - 1].abs_diff) return false;
    }
    return true;
}

// --- tails ------------------------------------------------------------------------------

double tail_mass(const walsh::WalshVector& x, int m) {
    double s = 0.0;
    for (const auto& [subset, c] : x.coeffs()) {
        if (walsh::subset_size(subset) >= m) s += c * c;
    }
    return s;
}

double weighted_tail_mass(const walsh::WalshVector& x, int m) {
    double s = 0.0;
    for (const auto& [subset, c] : x.coeffs()) {
        const int k = walsh::subset_size(subset);
        if (k >= m) s += k * c * c;
    }
    return s;
}

// --- output -----------------------------------------------------------------------------

void write_report_csv(std::ostream& out, const ConvergenceReport& report) {
    out << "n,mse,ci_low,ci_high\n";
    for (std::size_t j = 0; j < report.n_values.size(); ++j) {
        out << report.n_values[j] << ',' << format_double(report.mse[j]) << ','
            << format_double(report.ci_low[j]) << ',' << format_double(report.ci_high[j]) << '\n';
    }
}

void write_summary_json(std::ostream& out, const ConvergenceReport& report) {
    nlohmann::ordered_json j;
    j["slope"] = report.slope;
    j["intercept"] = report.intercept;
    j["r2"] = report.r_squared;
    j["paths"] = report.paths;
    j["seed"] = report.seed;
    out << j.dump() << '\n';
}

void write_report_json(std::ostream& out, const ConvergenceReport& report) {
    nlohmann::ordered_json j;
    j["n"] = report.n_values;
    j["mse"] = report.mse;
    j["ci_low"] = report.ci_low;
    j["ci_high"] = report.ci_high;
    j["slope"] = report.slope;
    j["intercept"] = report.intercept;
    j["r2"] = report.r_squared;
    j["paths"] = report.paths;
    j["seed"] = report.seed;
    out << j.dump(2) << '\n';
}

}  // namespace malcal::experiments
