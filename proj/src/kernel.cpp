#include "malcal/kernel.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "malcal/errors.hpp"

namespace malcal {

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int j = 2; j <= k; ++j) f *= j;
    return f;
}

// Product of (count of each distinct value)! for a sorted index.
double repeat_factorials(const Index& sorted) {
    double p = 1.0;
    std::size_t run = 1;
    for (std::size_t j = 1; j <= sorted.size(); ++j) {
        if (j < sorted.size() && sorted[j] == sorted[j - 1]) {
            ++run;
        } else {
            p *= factorial(static_cast<int>(run));
            run = 1;
        }
    }
    return p;
}

double overlap(double a, double b, double c, double d) {
    return std::max(0.0, std::min(b, d) - std::max(a, c));
}

}  // namespace

bool has_repeated_index(std::span<const int> index) {
    for (std::size_t a = 0; a < index.size(); ++a) {
        for (std::size_t b = a + 1; b < index.size(); ++b) {
            if (index[a] == index[b]) return true;
        }
    }
    return false;
}

DiscreteKernel::DiscreteKernel(int order, int n, bool symmetric)
    : order_(order), n_(n), symmetric_(symmetric || order <= 1), off_diagonal_(order <= 1) {
    if (order < 0) throw ValidationError("kernel order must be >= 0");
    if (n < 1) throw ValidationError("kernel mesh n must be >= 1");
}

DiscreteKernel DiscreteKernel::from_values(int n, std::span<const double> values) {
    DiscreteKernel f(1, n);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] != 0.0) f.values_[Index{static_cast<int>(i + 1)}] = values[i];
    }
    return f;
}

Index DiscreteKernel::canonical(std::span<const int> index) const {
    if (static_cast<int>(index.size()) != order_) {
        throw ValidationError("kernel of order " + std::to_string(order_) + " indexed with " +
                              std::to_string(index.size()) + " arguments");
    }
    Index key(index.begin(), index.end());
    if (symmetric_) std::sort(key.begin(), key.end());
    return key;
}

double DiscreteKernel::value(std::span<const int> index) const {
    const Index key = canonical(index);
    for (int i : key) {
        if (i <= 0) return 0.0;
    }
    const auto it = values_.find(key);
    return it == values_.end() ? 0.0 : it->second;
}

void DiscreteKernel::set(std::span<const int> index, double v) {
    Index key = canonical(index);
    for (int i : key) {
        if (i <= 0) throw ValidationError("kernel indices must be positive");
    }
    if (v == 0.0) {
        values_.erase(key);
        return;
    }
    if (off_diagonal_ && has_repeated_index(key)) {
        throw ValidationError("off-diagonal kernel cannot take a value on the diagonal");
    }
    values_[std::move(key)] = v;
}

void DiscreteKernel::add(std::span<const int> index, double v) {
    const Index key = canonical(index);
    set(key, value(key) + v);
}

std::size_t DiscreteKernel::multiplicity(const Index& key) const {
    if (!symmetric_) return 1;
    return static_cast<std::size_t>(std::llround(factorial(order_) / repeat_factorials(key)));
}

double DiscreteKernel::squared_norm() const {
    double s = 0.0;
    for (const auto& [key, v] : values_) s += static_cast<double>(multiplicity(key)) * v * v;
    return s / std::pow(static_cast<double>(n_), order_);
}

double DiscreteKernel::norm() const { return std::sqrt(squared_norm()); }

int DiscreteKernel::max_index() const {
    int m = 0;
    for (const auto& [key, v] : values_) {
        for (int i : key) m = std::max(m, i);
    }
    return m;
}

void DiscreteKernel::mark_off_diagonal() {
    for (const auto& [key, v] : values_) {
        if (v != 0.0 && has_repeated_index(key)) {
            throw ValidationError("kernel does not vanish on the diagonal");
        }
    }
    off_diagonal_ = true;
}

static void check_compatible(const DiscreteKernel& f, const DiscreteKernel& g) {
    if (f.order() != g.order() || f.mesh() != g.mesh()) {
        throw ValidationError("kernels differ in order or mesh");
    }
}

double inner(const DiscreteKernel& f, const DiscreteKernel& g) {
    check_compatible(f, g);
    double s = 0.0;
    f.for_each_tuple([&](const Index& t, double v) { s += v * g.value(t); });
    return s / std::pow(static_cast<double>(f.mesh()), f.order());
}

DiscreteKernel difference(const DiscreteKernel& f, const DiscreteKernel& g) {
    check_compatible(f, g);
    DiscreteKernel out(f.order(), f.mesh(), false);
    f.for_each_tuple([&](const Index& t, double v) { out.add(t, v); });
    g.for_each_tuple([&](const Index& t, double v) { out.add(t, -v); });
    return out;
}

// --- step functions --------------------------------------------------------

StepFunction::StepFunction(std::vector<StepPiece> pieces) : pieces_(std::move(pieces)) {
    for (const auto& p : pieces_) {
        if (!std::isfinite(p.level) || !std::isfinite(p.left) || !std::isfinite(p.right) ||
            p.left < 0.0 || p.right <= p.left) {
            throw ValidationError("step pieces need finite levels and 0 <= left < right");
        }
    }
}

StepFunction StepFunction::parse(const std::string& text) {
    std::vector<StepPiece> pieces;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        StepPiece p{};
        char c1 = 0;
        char c2 = 0;
        std::istringstream is(item);
        if (!(is >> p.level >> c1 >> p.left >> c2 >> p.right) || c1 != ':' || c2 != ':') {
            throw ValidationError("cannot parse step piece '" + item + "', expected level:left:right");
        }
        pieces.push_back(p);
    }
    return StepFunction(std::move(pieces));
}

double StepFunction::operator()(double t) const {
    double s = 0.0;
    for (const auto& p : pieces_) {
        if (p.left < t && t <= p.right) s += p.level;
    }
    return s;
}

double StepFunction::inner(const StepFunction& other) const {
    double s = 0.0;
    for (const auto& p : pieces_) {
        for (const auto& q : other.pieces_) {
            s += p.level * q.level * overlap(p.left, p.right, q.left, q.right);
        }
    }
    return s;
}

double StepFunction::total_variation_of_levels() const {
    double s = 0.0;
    for (const auto& p : pieces_) s += std::abs(p.level);
    return s;
}

double StepFunction::support_end() const {
    double e = 0.0;
    for (const auto& p : pieces_) e = std::max(e, p.right);
    return e;
}

std::string StepFunction::to_string() const {
    std::string out;
    char buf[96];
    for (const auto& p : pieces_) {
        std::snprintf(buf, sizeof buf, "%s%.17g:%.17g:%.17g", out.empty() ? "" : ";", p.level,
                      p.left, p.right);
        out += buf;
    }
    return out;
}

TensorStep TensorStep::cube(int order, double left, double right, double weight) {
    TensorStep t(order);
    t.add_box({weight, std::vector<double>(static_cast<std::size_t>(order), left),
               std::vector<double>(static_cast<std::size_t>(order), right)});
    return t;
}

TensorStep TensorStep::tensor_power(const StepFunction& g, int order) {
    TensorStep t(order);
    const auto& pieces = g.pieces();
    if (pieces.empty()) return t;
    std::vector<std::size_t> digit(static_cast<std::size_t>(order), 0);
    for (;;) {
        Box box{1.0, {}, {}};
        for (std::size_t d : digit) {
            box.weight *= pieces[d].level;
            box.left.push_back(pieces[d].left);
            box.right.push_back(pieces[d].right);
        }
        t.add_box(std::move(box));
        std::size_t pos = 0;
        while (pos < digit.size() && ++digit[pos] == pieces.size()) digit[pos++] = 0;
        if (pos == digit.size()) break;
    }
    return t;
}

void TensorStep::add_box(Box box) {
    if (static_cast<int>(box.left.size()) != order_ || static_cast<int>(box.right.size()) != order_) {
        throw ValidationError("box dimension does not match the function order");
    }
    boxes_.push_back(std::move(box));
}

double TensorStep::operator()(std::span<const double> u) const {
    if (static_cast<int>(u.size()) != order_) throw ValidationError("wrong argument count");
    double s = 0.0;
    for (const auto& box : boxes_) {
        bool inside = true;
        for (int d = 0; d < order_ && inside; ++d) {
            inside = box.left[d] < u[d] && u[d] <= box.right[d];
        }
        if (inside) s += box.weight;
    }
    return s;
}

double TensorStep::inner(const TensorStep& other) const {
    if (other.order_ != order_) throw ValidationError("box functions differ in order");
    double s = 0.0;
    for (const auto& a : boxes_) {
        for (const auto& b : other.boxes_) {
            double vol = a.weight * b.weight;
            for (int d = 0; d < order_ && vol != 0.0; ++d) {
                vol *= overlap(a.left[d], a.right[d], b.left[d], b.right[d]);
            }
            s += vol;
        }
    }
    return s;
}

// --- embedding --------------------------------------------------------------

double EmbeddedKernel::operator()(std::span<const double> u) const {
    if (static_cast<int>(u.size()) != kernel_.order()) throw ValidationError("wrong argument count");
    Index idx(u.size());
    for (std::size_t d = 0; d < u.size(); ++d) {
        if (u[d] <= 0.0) return 0.0;
        idx[d] = static_cast<int>(std::ceil(kernel_.mesh() * u[d]));
    }
    return kernel_.value(idx);
}

double EmbeddedKernel::inner(const TensorStep& target) const {
    if (target.order() != kernel_.order()) throw ValidationError("orders differ");
    const double n = kernel_.mesh();
    double s = 0.0;
    kernel_.for_each_tuple([&](const Index& t, double v) {
        double cell = 0.0;
        for (const auto& box : target.boxes()) {
            double vol = box.weight;
            for (std::size_t d = 0; d < t.size() && vol != 0.0; ++d) {
                vol *= overlap((t[d] - 1) / n, t[d] / n, box.left[d], box.right[d]);
            }
            cell += vol;
        }
        s += v * cell;
    });
    return s;
}

double EmbeddedKernel::distance(const TensorStep& target) const {
    const double sq = squared_norm() - 2.0 * inner(target) + target.squared_norm();
    return std::sqrt(std::max(0.0, sq));
}

TensorStep EmbeddedKernel::as_step() const {
    TensorStep out(kernel_.order());
    const double n = kernel_.mesh();
    kernel_.for_each_tuple([&](const Index& t, double v) {
        TensorStep::Box box{v, {}, {}};
        for (int i : t) {
            box.left.push_back((i - 1) / n);
            box.right.push_back(i / n);
        }
        out.add_box(std::move(box));
    });
    return out;
}

DiscreteKernel discretize(const StepFunction& g, int n) {
    if (n < 1) throw ValidationError("mesh parameter n must be >= 1");
    DiscreteKernel f(1, n);
    const auto last = static_cast<int>(std::ceil(g.support_end() * n)) + 1;
    for (int i = 1; i <= last; ++i) {
        const double v = g(static_cast<double>(i) / n);
        if (v != 0.0) f.set(std::span<const int>(&i, 1), v);
    }
    return f;
}

EmbeddedKernel embed(DiscreteKernel f) { return EmbeddedKernel(std::move(f)); }

DiscreteKernel symmetrize(const DiscreteKernel& f) {
    if (f.symmetric()) return f;
    DiscreteKernel out(f.order(), f.mesh(), true);
    const double k_factorial = factorial(f.order());
    for (const auto& [key, v] : f.entries()) {
        Index sorted = key;
        std::sort(sorted.begin(), sorted.end());
        out.add(sorted, v * repeat_factorials(sorted) / k_factorial);
    }
    if (f.off_diagonal()) out.mark_off_diagonal();
    return out;
}

DiscreteKernel remove_diagonal(const DiscreteKernel& f) {
    DiscreteKernel out(f.order(), f.mesh(), f.symmetric());
    for (const auto& [key, v] : f.entries()) {
        if (!has_repeated_index(key)) out.set(key, v);
    }
    out.mark_off_diagonal();
    return out;
}

DiscreteKernel tensor_power(const DiscreteKernel& f, int k) {
    if (f.order() != 1) throw ValidationError("tensor_power expects an order-1 kernel");
    if (k < 1) throw ValidationError("tensor power k must be >= 1");
    if (k == 1) return f;
    std::vector<std::pair<int, double>> support;
    for (const auto& [key, v] : f.entries()) support.emplace_back(key[0], v);
    if (std::pow(static_cast<double>(support.size()), k) > static_cast<double>(kEnumerationLimit)) {
        throw CostGuardError("tensor power support^k exceeds the enumeration limit");
    }
    DiscreteKernel out(k, f.mesh(), true);
    if (support.empty()) return out;
    // Nondecreasing positions into `support`, one per multiset.
    std::vector<std::size_t> pos(static_cast<std::size_t>(k), 0);
    Index key(static_cast<std::size_t>(k));
    for (;;) {
        double v = 1.0;
        for (std::size_t d = 0; d < pos.size(); ++d) {
            key[d] = support[pos[d]].first;
            v *= support[pos[d]].second;
        }
        out.set(key, v);
        std::size_t d = pos.size();
        while (d > 0 && pos[d - 1] == support.size() - 1) --d;
        if (d == 0) break;
        ++pos[d - 1];
        for (std::size_t e = d; e < pos.size(); ++e) pos[e] = pos[d - 1];
    }
    return out;
}

DiscreteKernel process_kernel(std::span<const DiscreteKernel> family) {
    if (family.empty()) throw ValidationError("process kernel needs a nonempty family");
    const int k = family.front().order();
    const int n = family.front().mesh();
    DiscreteKernel out(k + 1, n, false);
    for (std::size_t i = 0; i < family.size(); ++i) {
        if (family[i].order() != k || family[i].mesh() != n) {
            throw ValidationError("process family members differ in order or mesh");
        }
        family[i].for_each_tuple([&](const Index& t, double v) {
            Index full = t;
            full.push_back(static_cast<int>(i + 1));
            out.set(full, v);
        });
    }
    return out;
}

void write_kernel_csv(std::ostream& out, const DiscreteKernel& f) {
    for (int d = 1; d <= f.order(); ++d) out << 'i' << d << ',';
    out << "value\n";
    std::map<Index, double> rows;
    f.for_each_tuple([&](const Index& t, double v) { rows[t] = v; });
    char buf[64];
    for (const auto& [t, v] : rows) {
        for (int i : t) out << i << ',';
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
}

}  // namespace malcal
