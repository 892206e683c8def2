#include "malcal/path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "malcal/errors.hpp"

namespace malcal {

double WalkPath::value_at_step(std::size_t k) const {
    if (k > increments.size()) {
        throw std::out_of_range("walk step " + std::to_string(k) + " beyond horizon " +
                                std::to_string(increments.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += increments[i];
    return s / std::sqrt(static_cast<double>(n));
}

WalkPath simulate_walk(const NoiseSpec& spec, int n, std::size_t steps, Rng& rng) {
    if (n < 1) throw ValidationError("mesh parameter n must be >= 1");
    if (steps < 1) throw ValidationError("walk needs at least one increment");
    return WalkPath{n, sample(spec, rng, steps), spec.label()};
}

double walk_value(const WalkPath& path, double t) {
    if (!(t >= 0.0)) throw ValidationError("walk time must be nonnegative");
    // i/n is a common argument and n * (i/n) may land just below i.
    const double scaled = std::floor(static_cast<double>(path.n) * t + 1e-9);
    if (scaled > static_cast<double>(path.horizon())) {
        throw std::out_of_range("time " + std::to_string(t) + " beyond walk horizon");
    }
    return path.value_at_step(static_cast<std::size_t>(scaled));
}

namespace {

bool bridge_crosses(double gap_start, double gap_end, double dt, Rng& rng) {
    if (gap_start <= 0.0 || gap_end <= 0.0) return true;
    const double q = 2.0 * gap_start * gap_end / dt;
    if (q > 40.0) return false;
    return uniform01(rng) < std::exp(-q);
}

}  // namespace

CoupledPath simulate_coupled_binary(double b, int n, std::size_t steps,
                                    std::span<const double> bm_times, Rng& rng,
                                    const CouplingOptions& options) {
    if (!std::isfinite(b) || b <= 0.0) throw ValidationError("b must be positive and finite");
    if (n < 1) throw ValidationError("mesh parameter n must be >= 1");
    if (steps < 1) throw ValidationError("coupled path needs at least one step");
    if (options.fine_factor < 8) throw ValidationError("fine factor K must be >= 8");
    if (!std::is_sorted(bm_times.begin(), bm_times.end())) {
        throw ValidationError("Brownian sampling times must be sorted");
    }
    if (!bm_times.empty() && bm_times.front() < 0.0) {
        throw ValidationError("Brownian sampling times must be nonnegative");
    }

    const double root_n = std::sqrt(static_cast<double>(n));
    const double dt = 1.0 / (static_cast<double>(options.fine_factor) * n);
    const double sd = std::sqrt(dt);
    const double up = b / root_n;
    const double down = 1.0 / (b * root_n);
    const double last_bm = bm_times.empty() ? 0.0 : bm_times.back();
    const double horizon =
        options.horizon > 0.0
            ? options.horizon
            : 2.0 * std::max(last_bm, static_cast<double>(steps) / n) + 4.0;
    if (last_bm > horizon) throw ValidationError("Brownian sampling time beyond the horizon");
    const auto max_steps = static_cast<long long>(std::ceil(horizon / dt));

    std::vector<long long> bm_index(bm_times.size());
    std::transform(bm_times.begin(), bm_times.end(), bm_index.begin(),
                   [dt](double t) { return std::llround(t / dt); });

    CoupledPath out;
    out.walk.n = n;
    out.walk.spec_label = "binary(b=" + std::to_string(b) + ")";
    out.walk.increments.reserve(steps);
    out.passage_times.reserve(steps);
    out.passage_values.reserve(steps);
    out.bm_times.assign(bm_times.begin(), bm_times.end());
    out.bm_values.reserve(bm_times.size());
    out.fine_mesh = dt;

    double x = 0.0;
    double walk_sum = 0.0;
    double level = 0.0;
    std::size_t next_bm = 0;
    for (long long j = 0;; ++j) {
        while (next_bm < bm_index.size() && bm_index[next_bm] == j) {
            out.bm_values.push_back(x);
            ++next_bm;
        }
        const bool walk_done = out.walk.increments.size() >= steps;
        if (walk_done && next_bm >= bm_index.size()) break;
        if (j >= max_steps) throw CouplingUnderrun(out.walk.increments.size(), steps);

        const double y = x + sd * standard_normal(rng);
        if (!walk_done) {
            const double hi = level + up;
            const double lo = level - down;
            int hit = 0;
            if (y >= hi) {
                hit = 1;
            } else if (y <= lo) {
                hit = -1;
            } else {
                const bool cross_up = bridge_crosses(hi - x, hi - y, dt, rng);
                const bool cross_down = bridge_crosses(x - lo, y - lo, dt, rng);
                if (cross_up && cross_down) {
                    hit = uniform01(rng) < 0.5 ? 1 : -1;
                } else if (cross_up) {
                    hit = 1;
                } else if (cross_down) {
                    hit = -1;
                }
            }
            if (hit != 0) {
                const double xi = hit > 0 ? b : -1.0 / b;
                out.walk.increments.push_back(xi);
                walk_sum += xi;
                level = walk_sum / root_n;
                out.passage_times.push_back(static_cast<double>(j + 1) * dt);
                out.passage_values.push_back(y);
            }
        }
        x = y;
    }
    return out;
}

namespace {

using std::numbers::pi;

// Distance of the j-th image charge for the hitting density of 0 from y
// before 1: y, 2-y, 2+y, 4-y, 4+y, ...
double image_distance(int j, double y) {
    return (j % 2 == 1) ? static_cast<double>(j + 1) - y : static_cast<double>(j) + y;
}

// Ratio r(t) = f(t; y) / h_y(t), where f is the density of hitting 0 before 1
// from y in (0, 1) and h_y(t) = y exp(-y^2/2t) / sqrt(2 pi t^3) is the hitting
// density of 0 alone. r lies in [0, 1]. `stop(partial, bound)` sees a partial
// sum and a bound on the remainder and returns true once it can decide.
template <class Stop>
double small_time_ratio(double t, double y, Stop&& stop) {
    const double root_t = std::sqrt(t);
    double s = 0.0;
    for (int j = 0; j < 1'000'000; ++j) {
        const double d = image_distance(j, y);
        const double term = (d / y) * std::exp(-(d * d - y * y) / (2.0 * t));
        s += (j % 2 == 0) ? term : -term;
        const double d_next = image_distance(j + 1, y);
        // Terms decrease in magnitude once the distance passes sqrt(t).
        if (d_next > root_t) {
            const double bound = (d_next / y) * std::exp(-(d_next * d_next - y * y) / (2.0 * t));
            if (stop(s, bound)) return s;
        }
    }
    throw std::runtime_error("exit-time series did not converge");
}

template <class Stop>
double large_time_ratio(double t, double y, Stop&& stop) {
    const double log_factor =
        0.5 * std::log(2.0 * pi * t * t * t) - std::log(y) + y * y / (2.0 * t);
    if (log_factor > 600.0) return small_time_ratio(t, y, stop);
    const double factor = pi * std::exp(log_factor);
    const double c = pi * pi * t / 2.0;
    const double monotone_from = 1.0 / std::sqrt(2.0 * c);
    double s = 0.0;
    for (int k = 1; k < 1'000'000; ++k) {
        s += k * std::sin(k * pi * y) * std::exp(-c * k * k);
        const double next = k + 1.0;
        if (next >= monotone_from) {
            const double e = std::exp(-c * next * next);
            const double bound = factor * (next * e + e / (2.0 * c));
            if (stop(factor * s, bound)) return factor * s;
        }
    }
    throw std::runtime_error("exit-time series did not converge");
}

template <class Stop>
double hitting_ratio(double t, double y, double switch_time, Stop&& stop) {
    return t < switch_time ? small_time_ratio(t, y, stop) : large_time_ratio(t, y, stop);
}

void check_barriers(double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw ValidationError("exit barriers must be positive and finite");
    }
}

}  // namespace

ExitSample sample_exit(double alpha, double beta, Rng& rng, double tol) {
    check_barriers(alpha, beta);
    if (!(tol > 0.0) || tol > 1e-6) throw ValidationError("series tolerance must lie in (0, 1e-6]");
    const double width = alpha + beta;
    const double x = alpha / width;  // start, measured from the lower barrier
    const double switch_time = x * (1.0 - x);

    const bool upper = uniform01(rng) < x;
    const double y = upper ? 1.0 - x : x;
    for (;;) {
        const double z = standard_normal(rng);
        if (z == 0.0) continue;
        const double t = (y * y) / (z * z);
        const double u = uniform01(rng);
        bool accept = false;
        hitting_ratio(t, y, switch_time, [&](double partial, double bound) {
            if (u < partial - bound) {
                accept = true;
                return true;
            }
            if (u > partial + bound) return true;
            if (bound < tol) {
                accept = u <= partial;
                return true;
            }
            return false;
        });
        if (accept) return ExitSample{width * width * t, upper};
    }
}

double sample_first_passage_time(double alpha, double beta, Rng& rng, double tol) {
    return sample_exit(alpha, beta, rng, tol).time;
}

double exit_time_density(double alpha, double beta, double t, double tol) {
    check_barriers(alpha, beta);
    if (t <= 0.0) return 0.0;
    const double width = alpha + beta;
    const double x = alpha / width;
    const double ts = t / (width * width);
    const double switch_time = x * (1.0 - x);
    auto until_tol = [tol](double, double bound) { return bound < tol; };
    auto hitting_density = [&](double y) {
        const double h = y * std::exp(-y * y / (2.0 * ts)) / std::sqrt(2.0 * pi * ts * ts * ts);
        if (h == 0.0) return 0.0;  // the ratio is at most 1
        return h * hitting_ratio(ts, y, switch_time, until_tol);
    };
    return (hitting_density(x) + hitting_density(1.0 - x)) / (width * width);
}

Skeleton simulate_skeleton_binary(double b, int n, std::size_t steps, Rng& rng, double tol) {
    if (!std::isfinite(b) || b <= 0.0) throw ValidationError("b must be positive and finite");
    if (n < 1) throw ValidationError("mesh parameter n must be >= 1");
    if (steps < 1) throw ValidationError("skeleton needs at least one step");
    const double root_n = std::sqrt(static_cast<double>(n));
    Skeleton out;
    out.walk.n = n;
    out.walk.spec_label = "binary(b=" + std::to_string(b) + ")";
    out.walk.increments.reserve(steps);
    out.passage_times.reserve(steps);
    double t = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        const ExitSample e = sample_exit(1.0 / (b * root_n), b / root_n, rng, tol);
        t += e.time;
        out.walk.increments.push_back(e.upper ? b : -1.0 / b);
        out.passage_times.push_back(t);
    }
    return out;
}

void write_path_csv(std::ostream& out, const WalkPath& path,
                    std::span<const double> passage_times, double b, std::uint64_t seed) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "# n=%d,b=%.17g,seed=%llu\n", path.n, b,
                  static_cast<unsigned long long>(seed));
    out << buf << "i,xi,tau\n";
    for (std::size_t i = 0; i < path.horizon(); ++i) {
        if (i < passage_times.size()) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i + 1, path.increments[i],
                          passage_times[i]);
        } else {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,\n", i + 1, path.increments[i]);
        }
        out << buf;
    }
}

}  // namespace malcal
