#include "malcal/identities.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <random>

#include "malcal/errors.hpp"
#include "malcal/experiments.hpp"
#include "malcal/kernel.hpp"
#include "malcal/lattice.hpp"
#include "malcal/noise.hpp"
#include "malcal/oracle.hpp"
#include "malcal/rng.hpp"
#include "malcal/walsh.hpp"

namespace malcal::identities {

namespace {

using Eval = std::function<double(Outcome)>;

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Position of a binary outcome in the ordering shared by the oracle and the Walsh engine.
std::size_t position(Outcome w, int horizon) {
    std::size_t idx = 0;
    for (int j = 0; j < horizon; ++j) {
        if (w[static_cast<std::size_t>(j)] > 0.0) idx |= std::size_t{1} << j;
    }
    return idx;
}

// Random variable given by its values on all 2^M binary outcomes.
struct Table {
    int horizon;
    double b;
    std::shared_ptr<const std::vector<double>> values;

    RandomVariableFn fn(std::string label = "table") const {
        auto v = values;
        const int m = horizon;
        return RandomVariableFn(m, [v, m](Outcome w) { return (*v)[position(w, m)]; },
                                std::move(label));
    }
    walsh::WalshVector walsh() const { return walsh::from_values(*values, horizon, b); }
};

// Table depending only on the first `depends_on` coordinates.
Table random_table(int horizon, double b, Rng& rng, int depends_on) {
    const std::size_t size = std::size_t{1} << horizon;
    const std::size_t mask = (std::size_t{1} << depends_on) - 1;
    std::vector<double> base(mask + 1);
    for (auto& v : base) v = standard_normal(rng);
    auto values = std::make_shared<std::vector<double>>(size);
    for (std::size_t idx = 0; idx < size; ++idx) (*values)[idx] = base[idx & mask];
    return {horizon, b, std::move(values)};
}

Table random_table(int horizon, double b, Rng& rng) { return random_table(horizon, b, rng, horizon); }

DiscreteProcessFn process_of(const std::vector<Table>& z, bool predictable = false) {
    std::vector<RandomVariableFn> comps;
    for (std::size_t i = 0; i < z.size(); ++i) comps.push_back(z[i].fn("Z_" + std::to_string(i + 1)));
    return DiscreteProcessFn(std::move(comps), predictable);
}

DiscreteKernel random_order_one(int horizon, int n, Rng& rng) {
    std::vector<double> v(static_cast<std::size_t>(horizon));
    for (auto& x : v) x = standard_normal(rng);
    return DiscreteKernel::from_values(n, v);
}

// Symmetric order-k kernel, zero on the diagonal, random on 1..M.
DiscreteKernel random_symmetric(int k, int horizon, int n, Rng& rng) {
    DiscreteKernel f(k, n, true);
    Index cur(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) cur[j] = j + 1;
    for (;;) {
        f.set(cur, standard_normal(rng));
        int pos = k - 1;
        while (pos >= 0 && cur[pos] == horizon - k + pos + 1) --pos;
        if (pos < 0) break;
        ++cur[pos];
        for (int j = pos + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    if (k >= 2) f.mark_off_diagonal();
    return f;
}

// I^{n,k}(f) at w as the plain sum over ordered tuples.
double tuple_sum_wiener(const DiscreteKernel& f, Outcome w, int n) {
    double s = 0.0;
    f.for_each_tuple([&](const Index& t, double v) {
        double p = v;
        for (int i : t) p *= w[static_cast<std::size_t>(i - 1)];
        s += p;
    });
    return s * std::pow(static_cast<double>(n), -0.5 * f.order());
}

DiscreteKernel truncated(const DiscreteKernel& f, int last) {
    DiscreteKernel g(1, f.mesh());
    for (const auto& [key, v] : f.entries()) {
        if (key[0] <= last) g.set(key, v);
    }
    return g;
}

double expect(const oracle::EnumeratedSpace& space, Eval fn) {
    return oracle::expectation(space, RandomVariableFn(space.horizon(), std::move(fn)));
}

class Tracker {
  public:
    Tracker(std::string name, double b, double tol) : tol_(tol) {
        result_.name = std::move(name);
        result_.b = b;
    }

    void begin() { ok_ = true; }
    // `magnitude` is the size of the terms that were summed to get either side.
    void compare(double lhs, double rhs, double magnitude = 0.0) {
        const double err =
            std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs), magnitude});
        if (!(err <= tol_)) ok_ = false;
        if (std::isnan(err)) result_.max_error = err;
        else result_.max_error = std::max(result_.max_error, err);
    }
    // Every pair of routes.
    void compare_all(std::initializer_list<double> routes) {
        for (auto a = routes.begin(); a != routes.end(); ++a) {
            for (auto c = a + 1; c != routes.end(); ++c) compare(*a, *c);
        }
    }
    void end() {
        ++result_.instances;
        if (!ok_) ++result_.failures;
    }
    const CheckResult& result() const { return result_; }

  private:
    CheckResult result_;
    double tol_;
    bool ok_ = true;
};

void check_options(const SuiteOptions& options, int lo, int hi) {
    if (options.max_horizon < lo || options.max_horizon > hi) {
        throw ValidationError("horizon must lie in " + std::to_string(lo) + ".." + std::to_string(hi));
    }
    if (options.instances < 1) throw ValidationError("instances must be >= 1");
    if (!(options.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
    if (options.b_values.empty()) throw ValidationError("no b values given");
}

}  // namespace

bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<CheckResult> run_identity_suite(const SuiteOptions& options) {
    check_options(options, 2, 12);
    std::vector<CheckResult> out;
    for (std::size_t bi = 0; bi < options.b_values.size(); ++bi) {
        const double b = options.b_values[bi];
        const NoiseSpec spec = binary_noise(b);
        const double tol = options.tolerance;
        Tracker duality("duality", b, tol), variance("skorokhod variance", b, tol),
            commutation("D-delta commutation", b, tol), fubini("Fubini swap", b, tol),
            doleans("Doleans-Dade recursion", b, tol), mobius("Mobius inversion", b, tol),
            wiener_iso("multiple Wiener isometry", b, tol), walsh_inner("Walsh inner product", b, tol),
            predictable("predictable representation", b, tol),
            chaos_iso("Malliavin chaos isometry", b, tol), wick_moment("Wick second moment", b, tol);

        for (int inst = 0; inst < options.instances; ++inst) {
            Rng rng = make_stream(options.seed,
                                  experiments::stream_domain(experiments::StreamTag::exact_check, bi),
                                  static_cast<std::uint64_t>(inst));
            const int m = uniform_int(rng, 2, options.max_horizon);
            const int n = uniform_int(rng, 1, 20);
            const double rn = std::sqrt(static_cast<double>(n));
            const oracle::EnumeratedSpace space(spec, m);
            const Table xt = random_table(m, b, rng);
            const Table yt = random_table(m, b, rng);
            std::vector<Table> zt;
            for (int i = 0; i < m; ++i) zt.push_back(random_table(m, b, rng));
            const RandomVariableFn x = xt.fn("X");
            const RandomVariableFn y = yt.fn("Y");
            const DiscreteProcessFn z = process_of(zt);
            const int i0 = uniform_int(rng, 1, m);
            int j0 = uniform_int(rng, 1, m - 1);
            if (j0 >= i0) ++j0;
            const DiscreteKernel f = random_order_one(m, n, rng);

            // duality
            duality.begin();
            {
                const double lhs = expect(space, [&](Outcome w) {
                    double s = 0.0;
                    for (int i = 1; i <= m; ++i) {
                        s += z.component(i)(w) * lattice::malliavin_derivative(x, i, w, spec, n);
                    }
                    return s / n;
                });
                const double rhs = expect(space, [&](Outcome w) {
                    return lattice::skorokhod_integral(z, m, w, spec, n) * x(w);
                });
                duality.compare(lhs, rhs);
            }
            duality.end();

            // E[delta^2] = (1/n) sum E[E[Z_i|F_-i]^2] + (1/n^2) sum_{i != j} E[D_i Z_j D_j Z_i]
            variance.begin();
            {
                const double lhs = expect(space, [&](Outcome w) {
                    const double d = lattice::skorokhod_integral(z, m, w, spec, n);
                    return d * d;
                });
                double rhs = 0.0;
                for (int i = 1; i <= m; ++i) {
                    rhs += expect(space, [&](Outcome w) {
                               const double c = lattice::expectation_except(z.component(i), i, w, spec);
                               return c * c;
                           }) / n;
                    for (int j = 1; j <= m; ++j) {
                        if (i == j) continue;
                        rhs += expect(space, [&](Outcome w) {
                                   return lattice::malliavin_derivative(z.component(j), i, w, spec, n) *
                                          lattice::malliavin_derivative(z.component(i), j, w, spec, n);
                               }) / (static_cast<double>(n) * n);
                    }
                }
                variance.compare(lhs, rhs);
            }
            variance.end();

            // D_j delta(Z) = E[Z_j | F_-j] + delta((D_j Z_i)_{i != j})
            commutation.begin();
            {
                const RandomVariableFn delta(m, [&](Outcome w) {
                    return lattice::skorokhod_integral(z, m, w, spec, n);
                });
                std::vector<RandomVariableFn> comps;
                for (int i = 1; i <= m; ++i) {
                    if (i == j0) {
                        comps.emplace_back(m, [](Outcome) { return 0.0; });
                    } else {
                        comps.emplace_back(m, [&, i](Outcome w) {
                            return lattice::malliavin_derivative(z.component(i), j0, w, spec, n);
                        });
                    }
                }
                const DiscreteProcessFn dz(std::move(comps));
                space.for_each([&](Outcome w, double) {
                    const double lhs = lattice::malliavin_derivative(delta, j0, w, spec, n);
                    const double rhs = lattice::expectation_except(z.component(j0), j0, w, spec) +
                                       lattice::skorokhod_integral(dz, m, w, spec, n);
                    commutation.compare(lhs, rhs);
                });
            }
            commutation.end();

            // E[E[X|F_-i]|F_-j] = E[E[X|F_-j]|F_-i]
            fubini.begin();
            {
                const RandomVariableFn xi(m, [&](Outcome w) { return lattice::expectation_except(x, i0, w, spec); });
                const RandomVariableFn xj(m, [&](Outcome w) { return lattice::expectation_except(x, j0, w, spec); });
                space.for_each([&](Outcome w, double) {
                    fubini.compare(lattice::expectation_except(xi, j0, w, spec),
                                   lattice::expectation_except(xj, i0, w, spec));
                });
            }
            fubini.end();

            // exp(I(f)) = 1 + sum_i f(i) exp(I(f 1_[1,i-1])) xi_i / sqrt(n)
            doleans.begin();
            {
                std::vector<DiscreteKernel> heads;
                for (int i = 1; i <= m; ++i) heads.push_back(truncated(f, i - 1));
                space.for_each([&](Outcome w, double) {
                    double rhs = 1.0;
                    for (int i = 1; i <= m; ++i) {
                        const int idx[] = {i};
                        rhs += f.value(idx) * lattice::wick_exponential(heads[i - 1], w, n) * w[i - 1] / rn;
                    }
                    doleans.compare(lattice::wick_exponential(f, w, n), rhs);
                });
            }
            doleans.end();

            // Xi_B = n^{|B|/2} sum_{C in B} (-1)^{|B|-|C|} exp(I(1_C))
            mobius.begin();
            {
                const auto full = (walsh::SubsetMask{1} << m) - 1;
                const auto bset = static_cast<walsh::SubsetMask>(
                    std::uniform_int_distribution<std::uint32_t>(1, full)(rng));
                const int bsize = walsh::subset_size(bset);
                std::vector<std::pair<int, DiscreteKernel>> terms;
                for (walsh::SubsetMask c = bset;; c = (c - 1) & bset) {
                    DiscreteKernel ind(1, n);
                    for (int i : walsh::members(c)) {
                        const int idx[] = {i};
                        ind.set(idx, 1.0);
                    }
                    terms.emplace_back((bsize - walsh::subset_size(c)) % 2 ? -1 : 1, std::move(ind));
                    if (c == 0) break;
                }
                const double scale = std::pow(static_cast<double>(n), 0.5 * bsize);
                space.for_each([&](Outcome w, double) {
                    double lhs = 1.0;
                    for (int i : walsh::members(bset)) lhs *= w[i - 1];
                    // alternating sum of up to 2^M terms: errors scale with sum |term|
                    double rhs = 0.0, mass = 0.0;
                    for (const auto& [sign, ind] : terms) {
                        const double t = lattice::wick_exponential(ind, w, n);
                        rhs += sign * t;
                        mass += std::abs(t);
                    }
                    mobius.compare(lhs, scale * rhs, scale * mass);
                });
            }
            mobius.end();

            // E[I^k(f) I^l(g)] = 1_{k=l} k! <f, g>
            wiener_iso.begin();
            {
                const int kmax = std::min(m, 3);
                const int k = uniform_int(rng, 1, kmax);
                const int l = uniform_int(rng, 0, 1) ? k : uniform_int(rng, 1, kmax);
                const DiscreteKernel fk = random_symmetric(k, m, n, rng);
                const DiscreteKernel gl = random_symmetric(l, m, n, rng);
                const double lhs = expect(space, [&](Outcome w) {
                    return tuple_sum_wiener(fk, w, n) * tuple_sum_wiener(gl, w, n);
                });
                double fact = 1.0;
                for (int q = 2; q <= k; ++q) fact *= q;
                const double rhs = k == l ? fact * inner(fk, gl) : 0.0;
                wiener_iso.compare(lhs, rhs);
            }
            wiener_iso.end();

            // E[XY] = sum_A X_A Y_A
            walsh_inner.begin();
            walsh_inner.compare(expect(space, [&](Outcome w) { return x(w) * y(w); }),
                                xt.walsh().inner(yt.walsh()));
            walsh_inner.end();

            // X = E[X] + sum_i nabla_i X xi_i / sqrt(n), at up to 32 random outcomes
            predictable.begin();
            {
                const double mean = oracle::expectation(space, x);
                const int checks = static_cast<int>(std::min<std::size_t>(space.size(), 32));
                for (int c = 0; c < checks; ++c) {
                    const std::vector<double> w = sample(spec, rng, static_cast<std::size_t>(m));
                    double rhs = mean;
                    for (int i = 1; i <= m; ++i) {
                        const std::span<const double> prefix(w.data(), static_cast<std::size_t>(i - 1));
                        rhs += lattice::clark_ocone(x, i, prefix, spec, n) * w[i - 1] / rn;
                    }
                    predictable.compare(x(w), rhs);
                }
            }
            predictable.end();

            // (1/n) sum_i E[(D_i X)^2] = sum_k k k! ||f^{n,k}||^2
            chaos_iso.begin();
            {
                double lhs = 0.0;
                for (int i = 1; i <= m; ++i) {
                    lhs += expect(space, [&](Outcome w) {
                        const double d = lattice::malliavin_derivative(x, i, w, spec, n);
                        return d * d;
                    });
                }
                lhs /= n;
                const auto kernels = walsh::chaos_coefficients(xt.walsh(), n);
                double rhs = 0.0, fact = 1.0;
                for (std::size_t k = 1; k < kernels.size(); ++k) {
                    fact *= static_cast<double>(k);
                    rhs += static_cast<double>(k) * fact * kernels[k].squared_norm();
                }
                chaos_iso.compare(lhs, rhs);
            }
            chaos_iso.end();

            // E[exp(I(f))^2] = prod (1 + f(i)^2 / n)
            wick_moment.begin();
            {
                const double lhs = expect(space, [&](Outcome w) {
                    const double e = lattice::wick_exponential(f, w, n);
                    return e * e;
                });
                double rhs = 1.0;
                for (const auto& [key, v] : f.entries()) rhs *= 1.0 + v * v / n;
                wick_moment.compare(lhs, rhs);
            }
            wick_moment.end();
        }
        for (const Tracker* t : {&duality, &variance, &commutation, &fubini, &doleans, &mobius,
                                 &wiener_iso, &walsh_inner, &predictable, &chaos_iso, &wick_moment}) {
            out.push_back(t->result());
        }
    }
    return out;
}

std::vector<CheckResult> run_equivalence_suite(const SuiteOptions& options) {
    check_options(options, 1, 12);
    std::vector<CheckResult> out;
    const int m = options.max_horizon;
    for (std::size_t bi = 0; bi < options.b_values.size(); ++bi) {
        const double b = options.b_values[bi];
        const NoiseSpec spec = binary_noise(b);
        const double tol = options.tolerance;
        const oracle::EnumeratedSpace space(spec, m);
        Tracker malliavin("malliavin: lattice/binary/walsh/oracle", b, tol),
            skorokhod("skorokhod: lattice/binary/walsh/oracle", b, tol),
            clark("clark-ocone: lattice/walsh/oracle", b, tol),
            condexp("conditional expectation: walsh/oracle", b, tol),
            wick("wick exponential: lattice/walsh", b, tol),
            ito("ito vs skorokhod: lattice/walsh/oracle", b, tol),
            product("product: walsh/pointwise", b, tol),
            wiener("multiple wiener: walsh/tuple sum", b, tol);

        for (int inst = 0; inst < options.instances; ++inst) {
            Rng rng = make_stream(options.seed,
                                  experiments::stream_domain(experiments::StreamTag::exact_check,
                                                             0x100 + bi),
                                  static_cast<std::uint64_t>(inst));
            const int n = uniform_int(rng, 1, 20);
            const Table xt = random_table(m, b, rng);
            const Table yt = random_table(m, b, rng);
            std::vector<Table> zt, pt;
            for (int i = 0; i < m; ++i) zt.push_back(random_table(m, b, rng));
            for (int i = 0; i < m; ++i) pt.push_back(random_table(m, b, rng, i));
            const int i0 = uniform_int(rng, 1, m);
            const DiscreteKernel f = random_order_one(m, n, rng);
            const int k = uniform_int(rng, 1, std::min(m, 3));
            const DiscreteKernel fk = random_symmetric(k, m, n, rng);

            const RandomVariableFn x = xt.fn("X");
            const RandomVariableFn y = yt.fn("Y");
            const DiscreteProcessFn z = process_of(zt);
            const DiscreteProcessFn zp = process_of(pt, true);
            const walsh::WalshVector xw = xt.walsh();
            const walsh::WalshVector yw = yt.walsh();
            std::vector<walsh::WalshVector> zw, pw;
            for (const auto& t : zt) zw.push_back(t.walsh());
            for (const auto& t : pt) pw.push_back(t.walsh());

            const walsh::WalshVector d_w = walsh::malliavin_derivative(xw, i0, n);
            const walsh::WalshVector delta_w = walsh::skorokhod(zw, n);
            const walsh::WalshVector nabla_w = walsh::clark_ocone(xw, i0, n);
            const walsh::WalshVector cond_w = walsh::conditional_expectation(xw, i0);
            const walsh::WalshVector wick_w = walsh::wick_exponential(f, n, m, b);
            const walsh::WalshVector ito_w = walsh::skorokhod(pw, n);
            const walsh::WalshVector prod_w = walsh::multiply(xw, yw);
            const walsh::WalshVector wiener_w = walsh::multiple_wiener(fk, n, m, b);

            for (Tracker* t : {&malliavin, &skorokhod, &clark, &condexp, &wick, &ito, &product, &wiener}) {
                t->begin();
            }
            std::vector<int> given(static_cast<std::size_t>(i0));
            for (int j = 0; j < i0; ++j) given[j] = j + 1;
            space.for_each([&](Outcome w, double) {
                malliavin.compare_all({lattice::malliavin_derivative(x, i0, w, spec, n),
                                       lattice::malliavin_derivative_binary(x, i0, w, b, n),
                                       d_w.evaluate(w), oracle::malliavin(space, x, i0, w, n)});
                skorokhod.compare_all({lattice::skorokhod_integral(z, m, w, spec, n),
                                       lattice::skorokhod_integral_binary(z, m, w, b, n),
                                       delta_w.evaluate(w), oracle::skorokhod(space, z, m, w, n)});
                const auto prefix = w.first(static_cast<std::size_t>(i0 - 1));
                clark.compare_all({lattice::clark_ocone(x, i0, prefix, spec, n), nabla_w.evaluate(w),
                                   oracle::clark_ocone(space, x, i0, prefix, n)});
                condexp.compare(cond_w.evaluate(w),
                                oracle::conditional_expectation(space, x, given,
                                                                w.first(static_cast<std::size_t>(i0))));
                wick.compare(lattice::wick_exponential(f, w, n), wick_w.evaluate(w));
                WalkPath path;
                path.n = n;
                path.increments.assign(w.begin(), w.end());
                ito.compare_all({lattice::ito_integral(zp, path), ito_w.evaluate(w),
                                 oracle::skorokhod(space, zp, m, w, n)});
                product.compare(prod_w.evaluate(w), x(w) * y(w));
                wiener.compare(wiener_w.evaluate(w), tuple_sum_wiener(fk, w, n));
            });
            for (Tracker* t : {&malliavin, &skorokhod, &clark, &condexp, &wick, &ito, &product, &wiener}) {
                t->end();
            }
        }
        for (const Tracker* t : {&malliavin, &skorokhod, &clark, &condexp, &wick, &ito, &product, &wiener}) {
            out.push_back(t->result());
        }
    }
    return out;
}

void write_results_csv(std::ostream& out, const std::vector<CheckResult>& results) {
    out << "check,b,instances,failures,max_error,status\n";
    for (const auto& r : results) {
        char err[32];
        std::snprintf(err, sizeof err, "%.3e", r.max_error);
        out << '"' << r.name << "\"," << r.b << ',' << r.instances << ',' << r.failures << ','
            << err << ',' << (r.passed() ? "PASS" : "FAIL") << '\n';
    }
}

}  // namespace malcal::identities
