#include "malcal/walsh.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "malcal/errors.hpp"

namespace malcal::walsh {

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int j = 2; j <= k; ++j) f *= j;
    return f;
}

void check_same_space(const WalshVector& x, const WalshVector& y) {
    if (x.horizon() != y.horizon() || x.b() != y.b()) {
        throw ValidationError("Walsh vectors live on different spaces (M or b differ)");
    }
}

SubsetMask bit_of(int i) { return SubsetMask{1} << (i - 1); }

void check_position(int i, int lo, int hi, const char* what) {
    if (i < lo || i > hi) {
        throw std::out_of_range(std::string(what) + " index " + std::to_string(i) +
                                " outside " + std::to_string(lo) + ".." + std::to_string(hi));
    }
}

}  // namespace

SubsetMask subset_of(std::span<const int> indices) {
    SubsetMask mask = 0;
    for (int i : indices) {
        check_position(i, 1, kMaxHorizon, "subset");
        mask |= bit_of(i);
    }
    return mask;
}

std::vector<int> members(SubsetMask mask) {
    std::vector<int> out;
    for (int i = 1; mask != 0; ++i, mask >>= 1) {
        if (mask & 1u) out.push_back(i);
    }
    return out;
}

int subset_size(SubsetMask mask) { return std::popcount(mask); }

WalshVector::WalshVector(int horizon, double b) : horizon_(horizon), b_(b) {
    if (horizon < 0 || horizon > kMaxHorizon) {
        throw CostGuardError("Walsh horizon must lie in 0..24, got " + std::to_string(horizon));
    }
    if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("b must be positive and finite");
}

void WalshVector::check_subset(SubsetMask subset) const {
    if (horizon_ < 32 && (subset >> horizon_) != 0) {
        throw ValidationError("subset reaches beyond the horizon M = " + std::to_string(horizon_));
    }
}

double WalshVector::coeff(SubsetMask subset) const {
    const auto it = coeffs_.find(subset);
    return it == coeffs_.end() ? 0.0 : it->second;
}

void WalshVector::set(SubsetMask subset, double v) {
    check_subset(subset);
    if (v == 0.0) {
        coeffs_.erase(subset);
    } else {
        coeffs_[subset] = v;
    }
}

void WalshVector::add(SubsetMask subset, double v) { set(subset, coeff(subset) + v); }

double WalshVector::inner(const WalshVector& other) const {
    check_same_space(*this, other);
    const auto& small = coeffs_.size() <= other.coeffs_.size() ? *this : other;
    const auto& large = &small == this ? other : *this;
    double s = 0.0;
    for (const auto& [a, v] : small.coeffs_) s += v * large.coeff(a);
    return s;
}

double WalshVector::evaluate(Outcome outcome) const {
    if (static_cast<int>(outcome.size()) < horizon_) {
        throw ValidationError("outcome shorter than the Walsh horizon");
    }
    double s = 0.0;
    for (const auto& [a, v] : coeffs_) {
        double basis = 1.0;
        for (int i : members(a)) basis *= outcome[static_cast<std::size_t>(i - 1)];
        s += v * basis;
    }
    return s;
}

std::vector<double> WalshVector::values() const {
    std::vector<double> arr(std::size_t{1} << horizon_, 0.0);
    for (const auto& [a, v] : coeffs_) arr[a] = v;
    const double lo_atom = -1.0 / b_;
    const double hi_atom = b_;
    for (int j = 0; j < horizon_; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        for (std::size_t lo = 0; lo < arr.size(); ++lo) {
            if (lo & bit) continue;
            const double c0 = arr[lo];
            const double c1 = arr[lo | bit];
            arr[lo] = c0 + lo_atom * c1;
            arr[lo | bit] = c0 + hi_atom * c1;
        }
    }
    return arr;
}

WalshVector& WalshVector::operator+=(const WalshVector& other) {
    check_same_space(*this, other);
    for (const auto& [a, v] : other.coeffs_) add(a, v);
    return *this;
}

WalshVector& WalshVector::operator*=(double s) {
    if (s == 0.0) {
        coeffs_.clear();
    } else {
        for (auto& [a, v] : coeffs_) v *= s;
    }
    return *this;
}

WalshVector operator+(WalshVector a, const WalshVector& b) { return a += b; }
WalshVector operator-(WalshVector a, const WalshVector& b) { return a += (-1.0) * b; }
WalshVector operator*(double s, WalshVector a) { return a *= s; }

std::vector<double> outcome_of(SubsetMask bits, int horizon, double b) {
    std::vector<double> omega(static_cast<std::size_t>(horizon));
    for (int j = 0; j < horizon; ++j) omega[static_cast<std::size_t>(j)] = (bits >> j) & 1u ? b : -1.0 / b;
    return omega;
}

WalshVector from_values(std::span<const double> values, int horizon, double b) {
    WalshVector out(horizon, b);
    if (values.size() != (std::size_t{1} << horizon)) {
        throw ValidationError("expected 2^M outcome values");
    }
    std::vector<double> arr(values.begin(), values.end());
    const double p_lo = b * b / (b * b + 1.0);
    const double p_hi = 1.0 / (b * b + 1.0);
    const double lo_atom = -1.0 / b;
    const double hi_atom = b;
    for (int j = 0; j < horizon; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        for (std::size_t lo = 0; lo < arr.size(); ++lo) {
            if (lo & bit) continue;
            const double v0 = arr[lo];
            const double v1 = arr[lo | bit];
            arr[lo] = p_lo * v0 + p_hi * v1;
            arr[lo | bit] = p_lo * lo_atom * v0 + p_hi * hi_atom * v1;
        }
    }
    for (std::size_t a = 0; a < arr.size(); ++a) {
        if (arr[a] != 0.0) out.set(static_cast<SubsetMask>(a), arr[a]);
    }
    return out;
}

WalshVector from_function(const RandomVariableFn& x, double b) {
    const int m = x.horizon();
    if (m > kMaxHorizon) throw CostGuardError("Walsh transform limited to M <= 24");
    std::vector<double> vals(std::size_t{1} << m);
    for (std::size_t bits = 0; bits < vals.size(); ++bits) {
        vals[bits] = x(outcome_of(static_cast<SubsetMask>(bits), m, b));
    }
    return from_values(vals, m, b);
}

WalshVector multiply(const WalshVector& x, const WalshVector& y) {
    check_same_space(x, y);
    const double c = x.b() - 1.0 / x.b();
    WalshVector out(x.horizon(), x.b());
    for (const auto& [a, xa] : x.coeffs()) {
        for (const auto& [bb, yb] : y.coeffs()) {
            const SubsetMask common = a & bb;
            const SubsetMask sym = a ^ bb;
            if (c == 0.0 || common == 0) {
                out.add(sym, xa * yb);
                continue;
            }
            // prod_{i in common} (1 + c xi_i) expanded over subsets of `common`.
            SubsetMask sub = common;
            for (;;) {
                out.add(sym | sub, xa * yb * std::pow(c, subset_size(sub)));
                if (sub == 0) break;
                sub = (sub - 1) & common;
            }
        }
    }
    return out;
}

WalshVector malliavin_derivative(const WalshVector& x, int i, int n) {
    check_position(i, 1, x.horizon(), "Malliavin");
    const double r = std::sqrt(static_cast<double>(n));
    const SubsetMask bit = bit_of(i);
    WalshVector out(x.horizon(), x.b());
    for (const auto& [a, v] : x.coeffs()) {
        if (a & bit) out.add(a ^ bit, r * v);
    }
    return out;
}

WalshVector skorokhod(std::span<const WalshVector> z, int n) {
    if (z.empty()) throw ValidationError("Skorokhod integrand needs at least one component");
    const int m = z.front().horizon();
    if (static_cast<int>(z.size()) > m) throw ValidationError("more integrand components than M");
    const double r = std::sqrt(static_cast<double>(n));
    WalshVector out(m, z.front().b());
    for (std::size_t k = 0; k < z.size(); ++k) {
        check_same_space(z[k], out);
        const SubsetMask bit = bit_of(static_cast<int>(k + 1));
        for (const auto& [a, v] : z[k].coeffs()) {
            if (!(a & bit)) out.add(a | bit, v / r);
        }
    }
    return out;
}

WalshVector clark_ocone(const WalshVector& x, int i, int n) {
    check_position(i, 1, x.horizon(), "Clark-Ocone");
    const double r = std::sqrt(static_cast<double>(n));
    const SubsetMask bit = bit_of(i);
    WalshVector out(x.horizon(), x.b());
    for (const auto& [a, v] : x.coeffs()) {
        if ((a & bit) && (a >> i) == 0) out.set(a ^ bit, r * v);
    }
    return out;
}

WalshVector conditional_expectation(const WalshVector& x, int i) {
    check_position(i, 0, x.horizon(), "conditioning");
    WalshVector out(x.horizon(), x.b());
    for (const auto& [a, v] : x.coeffs()) {
        if ((static_cast<std::uint64_t>(a) >> i) == 0) out.set(a, v);
    }
    return out;
}

WalshVector wick_exponential(const DiscreteKernel& f, int n, int horizon, double b) {
    if (f.order() != 1) throw ValidationError("Wick exponential needs an order-1 kernel");
    std::vector<std::pair<int, double>> support;
    for (const auto& [key, v] : f.entries()) {
        check_position(key[0], 1, horizon, "Wick exponential support");
        support.emplace_back(key[0], v);
    }
    const double r = std::sqrt(static_cast<double>(n));
    WalshVector out(horizon, b);
    const std::size_t count = std::size_t{1} << support.size();
    for (std::size_t pick = 0; pick < count; ++pick) {
        SubsetMask a = 0;
        double c = 1.0;
        for (std::size_t j = 0; j < support.size(); ++j) {
            if ((pick >> j) & 1u) {
                a |= bit_of(support[j].first);
                c *= support[j].second / r;
            }
        }
        out.set(a, c);
    }
    return out;
}

WalshVector multiple_wiener(const DiscreteKernel& f, int n, int horizon, double b) {
    const int k = f.order();
    WalshVector out(horizon, b);
    if (k == 0) {
        out.set(0, f.value(Index{}));
        return out;
    }
    for (const auto& [key, v] : f.entries()) {
        for (int i : key) check_position(i, 1, horizon, "kernel support");
        if (has_repeated_index(key)) {
            throw ValidationError("multiple Wiener integrand must vanish on the diagonal");
        }
        if (!f.symmetric()) {
            Index perm = key;
            std::sort(perm.begin(), perm.end());
            do {
                if (std::abs(f.value(perm) - v) > 1e-12 * std::max(1.0, std::abs(v))) {
                    throw ValidationError("multiple Wiener integrand must be symmetric");
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
    }
    const double scale = factorial(k) / std::pow(static_cast<double>(n), 0.5 * k);
    for (const auto& [key, v] : f.entries()) {
        if (!std::is_sorted(key.begin(), key.end())) continue;
        out.set(subset_of(key), scale * v);
    }
    return out;
}

std::vector<DiscreteKernel> chaos_coefficients(const WalshVector& x, int n) {
    std::vector<DiscreteKernel> kernels;
    kernels.reserve(static_cast<std::size_t>(x.horizon() + 1));
    for (int k = 0; k <= x.horizon(); ++k) kernels.emplace_back(k, n, true);
    for (const auto& [a, v] : x.coeffs()) {
        const int k = subset_size(a);
        const double scale = std::pow(static_cast<double>(n), 0.5 * k) / factorial(k);
        kernels[static_cast<std::size_t>(k)].set(members(a), scale * v);
    }
    for (auto& kernel : kernels) kernel.mark_off_diagonal();
    return kernels;
}

WalshVector from_chaos(std::span<const DiscreteKernel> kernels, int n, int horizon, double b) {
    WalshVector out(horizon, b);
    for (const auto& f : kernels) out += multiple_wiener(f, n, horizon, b);
    return out;
}

void write_csv(std::ostream& out, const WalshVector& x) {
    out << "subset,coefficient\n";
    char buf[64];
    for (const auto& [a, v] : x.coeffs()) {
        out << '"';
        bool first = true;
        for (int i : members(a)) {
            if (!first) out << ',';
            out << i;
            first = false;
        }
        std::snprintf(buf, sizeof buf, "\",%.17g\n", v);
        out << buf;
    }
}

}  // namespace malcal::walsh
