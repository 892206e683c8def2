#pragma once

#include <algorithm>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace malcal {

/// Multi-index (i_1, ..., i_k) of positive time indices.
using Index = std::vector<int>;

/// Finitely supported function on N^k with the L^2_n(N^k) norm
/// ||f||^2 = n^{-k} sum f(i)^2.
///
/// Symmetric kernels are stored once per multiset (keys sorted ascending) and
/// every lookup canonicalises its argument. Non-symmetric kernels store each
/// tuple separately. Indices <= 0 read as zero.
class DiscreteKernel {
  public:
    DiscreteKernel(int order, int n, bool symmetric = false);

    /// Order-1 kernel with values[i-1] at index i.
    static DiscreteKernel from_values(int n, std::span<const double> values);

    int order() const noexcept { return order_; }
    int mesh() const noexcept { return n_; }
    bool symmetric() const noexcept { return symmetric_; }
    bool off_diagonal() const noexcept { return off_diagonal_; }

    double value(std::span<const int> index) const;
    void set(std::span<const int> index, double v);
    void add(std::span<const int> index, double v);

    /// Stored entries: canonical sorted keys for symmetric kernels.
    const std::map<Index, double>& entries() const noexcept { return values_; }

    /// Calls fn(index, value) for every tuple with a stored value, expanding
    /// symmetric entries to all their distinct permutations.
    template <class Fn>
    void for_each_tuple(Fn&& fn) const;

    /// Number of distinct tuples a stored key stands for.
    std::size_t multiplicity(const Index& key) const;

    double squared_norm() const;
    double norm() const;
    int max_index() const;

    /// Flags the kernel as vanishing on the diagonal; throws if it does not.
    void mark_off_diagonal();

  private:
    Index canonical(std::span<const int> index) const;

    int order_;
    int n_;
    bool symmetric_;
    bool off_diagonal_ = false;
    std::map<Index, double> values_;
};

/// <f, g> in L^2_n(N^k).
double inner(const DiscreteKernel& f, const DiscreteKernel& g);

/// f - g as a non-symmetric kernel.
DiscreteKernel difference(const DiscreteKernel& f, const DiscreteKernel& g);

bool has_repeated_index(std::span<const int> index);

/// level * 1_{(left, right]}.
struct StepPiece {
    double level;
    double left;
    double right;
};

/// Step function sum_j a_j 1_{(b_j, c_j]} on [0, inf).
class StepFunction {
  public:
    StepFunction() = default;
    explicit StepFunction(std::vector<StepPiece> pieces);

    /// Parses "a:b:c;a:b:c;..." into pieces a * 1_{(b, c]}.
    static StepFunction parse(const std::string& text);
    static StepFunction indicator(double left, double right) {
        return StepFunction({{1.0, left, right}});
    }

    const std::vector<StepPiece>& pieces() const noexcept { return pieces_; }
    double operator()(double t) const;
    double inner(const StepFunction& other) const;
    double squared_norm() const { return inner(*this); }
    double total_variation_of_levels() const;  // sum_j |a_j|
    double support_end() const;
    std::string to_string() const;

  private:
    std::vector<StepPiece> pieces_;
};

/// Piecewise-constant function on [0, inf)^k given as a finite sum of
/// weighted boxes prod_d (left_d, right_d].
class TensorStep {
  public:
    struct Box {
        double weight;
        std::vector<double> left;
        std::vector<double> right;
    };

    explicit TensorStep(int order) : order_(order) {}

    /// weight * 1_{(left, right]^k}.
    static TensorStep cube(int order, double left, double right, double weight = 1.0);
    /// g^{(x)k} expanded into boxes.
    static TensorStep tensor_power(const StepFunction& g, int order);

    int order() const noexcept { return order_; }
    const std::vector<Box>& boxes() const noexcept { return boxes_; }
    void add_box(Box box);

    double operator()(std::span<const double> u) const;
    double inner(const TensorStep& other) const;
    double squared_norm() const { return inner(*this); }

  private:
    int order_;
    std::vector<Box> boxes_;
};

/// Piecewise-constant embedding u -> f(ceil(n u_1), ..., ceil(n u_k)).
class EmbeddedKernel {
  public:
    explicit EmbeddedKernel(DiscreteKernel f) : kernel_(std::move(f)) {}

    const DiscreteKernel& kernel() const noexcept { return kernel_; }
    double operator()(std::span<const double> u) const;
    double squared_norm() const { return kernel_.squared_norm(); }
    /// Integral of the embedding against a box function, cell by cell.
    double inner(const TensorStep& target) const;
    /// L^2([0, inf)^k) distance to a box function.
    double distance(const TensorStep& target) const;
    /// The embedding written as a box function (one box per tuple).
    TensorStep as_step() const;

  private:
    DiscreteKernel kernel_;
};

/// i -> g(i / n).
DiscreteKernel discretize(const StepFunction& g, int n);
EmbeddedKernel embed(DiscreteKernel f);
DiscreteKernel symmetrize(const DiscreteKernel& f);
DiscreteKernel remove_diagonal(const DiscreteKernel& f);
/// f^{(x)k}, stored symmetric; refuses when |support|^k exceeds the enumeration cap.
DiscreteKernel tensor_power(const DiscreteKernel& f, int k);
/// Order-(k+1) kernel (i_1..i_k, i) -> family[i-1](i_1..i_k).
DiscreteKernel process_kernel(std::span<const DiscreteKernel> family);

/// Rows `i1,...,ik,value` over all tuples, lexicographic.
void write_kernel_csv(std::ostream& out, const DiscreteKernel& f);

// ---------------------------------------------------------------------------

template <class Fn>
void DiscreteKernel::for_each_tuple(Fn&& fn) const {
    for (const auto& [key, v] : values_) {
        if (!symmetric_) {
            fn(key, v);
            continue;
        }
        Index perm = key;  // sorted, so next_permutation visits each arrangement once
        do {
            fn(perm, v);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

}  // namespace malcal
