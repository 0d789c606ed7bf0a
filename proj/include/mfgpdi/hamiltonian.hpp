#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace mfgpdi {

/// Closed interval [lo, hi]; the 1D subdifferential of a convex function.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] double midpoint() const { return 0.5 * (lo + hi); }
    [[nodiscard]] double width() const { return hi - lo; }
    [[nodiscard]] bool contains(double v, double tol = 0.0) const
    {
        return v >= lo - tol && v <= hi + tol;
    }
    /// Distance from v to the interval (0 inside).
    [[nodiscard]] double distance(double v) const
    {
        if (v < lo) return lo - v;
        if (v > hi) return v - hi;
        return 0.0;
    }
};

enum class SelectionRule { MinNorm, Left, Right };

enum class HamiltonianKind { Analytic, ControlSet };

/// Closed forms the regularization module knows how to prox exactly.
enum class BuiltIn { None, Abs, WeightedAbs, ClippedQuadratic };

/// Finite control grid for H(x,p) = max_a { b(x,a) p - f(x,a) }.
struct ControlSet {
    std::vector<double> controls;
    std::function<double(double, double)> drift; ///< b(x, a)
    std::function<double(double, double)> cost;  ///< f(x, a)
};

/// Maximizers within this absolute distance of the max are all kept.
inline constexpr double kArgmaxTolerance = 1e-12;

/// A convex, Lipschitz-in-p Hamiltonian on a 1D domain.
///
/// Immutable after construction; copies share the underlying callables.
class Hamiltonian {
public:
    using ValueFn = std::function<double(double, double)>;
    using SubdiffFn = std::function<Interval(double, double)>;

    Hamiltonian(std::string id, HamiltonianKind kind, double lipschitz, ValueFn value,
                SubdiffFn subdiff, BuiltIn builtin = BuiltIn::None);

    /// H(x,p) = |p|.
    static Hamiltonian absolute();
    /// H(x,p) = x|p|, i.e. the control set a in [-1,1] with drift x*a.
    static Hamiltonian weighted_absolute();
    /// H(p) = p^2/2 on |p| <= 1, extended by |p| - 1/2 (Huber, L_H = 1).
    static Hamiltonian clipped_quadratic();
    /// Max over a finite control grid. L_H = max |b(x,a)| over the grid and
    /// `samples` equispaced x in [x_lo, x_hi].
    static Hamiltonian from_controls(ControlSet set, std::string id, double x_lo = 0.0,
                                     double x_hi = 1.0, int samples = 1025);
    /// JSON file with `alphas` (array), `b` and `f` (expression strings in x, a).
    static Hamiltonian load_controls(const std::filesystem::path& file, double x_lo = 0.0,
                                     double x_hi = 1.0);
    /// "abs", "xabs", "quad" or "control:<file>".
    static Hamiltonian from_id(std::string_view id, double x_lo = 0.0, double x_hi = 1.0);

    [[nodiscard]] double operator()(double x, double p) const { return value_(x, p); }
    [[nodiscard]] double eval(double x, double p) const { return value_(x, p); }
    [[nodiscard]] Interval subdiff(double x, double p) const { return subdiff_(x, p); }
    [[nodiscard]] double select_subgradient(double x, double p, SelectionRule rule) const;

    [[nodiscard]] double lipschitz() const { return lipschitz_; }
    [[nodiscard]] HamiltonianKind kind() const { return kind_; }
    [[nodiscard]] BuiltIn builtin() const { return builtin_; }
    [[nodiscard]] const std::string& id() const { return id_; }
    /// The control grid, or nullptr for analytic Hamiltonians.
    [[nodiscard]] const ControlSet* controls() const { return controls_.get(); }

private:
    std::string id_;
    HamiltonianKind kind_;
    double lipschitz_;
    ValueFn value_;
    SubdiffFn subdiff_;
    BuiltIn builtin_;
    std::shared_ptr<const ControlSet> controls_;
};

} // namespace mfgpdi
