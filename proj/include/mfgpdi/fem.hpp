#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace mfgpdi {

using ScalarField = std::function<double(double)>;

/// Strictly increasing nodes a = x_0 < ... < x_N = b.
class Mesh1D {
public:
    /// Throws InvalidArgument unless N >= 2 and the nodes strictly increase.
    explicit Mesh1D(std::vector<double> nodes);

    [[nodiscard]] static std::shared_ptr<const Mesh1D> uniform(double a, double b,
                                                               std::size_t elements);

    [[nodiscard]] std::size_t num_elements() const { return nodes_.size() - 1; }
    [[nodiscard]] std::size_t num_nodes() const { return nodes_.size(); }
    [[nodiscard]] std::size_t num_interior() const { return nodes_.size() - 2; }
    [[nodiscard]] double node(std::size_t i) const { return nodes_[i]; }
    [[nodiscard]] std::span<const double> nodes() const { return nodes_; }
    [[nodiscard]] double a() const { return nodes_.front(); }
    [[nodiscard]] double b() const { return nodes_.back(); }
    [[nodiscard]] double h(std::size_t e) const { return nodes_[e + 1] - nodes_[e]; }
    [[nodiscard]] double max_h() const;
    /// Element containing x (clamped to the first/last element outside [a, b]).
    [[nodiscard]] std::size_t locate(double x) const;
    [[nodiscard]] bool same_nodes(const Mesh1D& other) const { return nodes_ == other.nodes_; }

    /// The two Gauss points of element e.
    [[nodiscard]] std::array<double, 2> gauss_points(std::size_t e) const;

private:
    std::vector<double> nodes_;
};

using MeshPtr = std::shared_ptr<const Mesh1D>;

enum class BoundaryCondition { Dirichlet0, Free };

/// Continuous piecewise-linear function given by its nodal values.
class FeFunction {
public:
    FeFunction(MeshPtr mesh, std::vector<double> values,
               BoundaryCondition bc = BoundaryCondition::Dirichlet0);

    [[nodiscard]] static FeFunction zero(MeshPtr mesh);
    /// Dirichlet-0 function from its interior nodal values.
    [[nodiscard]] static FeFunction from_interior(MeshPtr mesh, std::span<const double> interior);

    [[nodiscard]] const MeshPtr& mesh() const { return mesh_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] std::span<double> values() { return values_; }
    [[nodiscard]] double value(std::size_t i) const { return values_[i]; }
    [[nodiscard]] BoundaryCondition bc() const { return bc_; }
    [[nodiscard]] std::vector<double> interior() const;

    [[nodiscard]] double slope(std::size_t e) const;
    [[nodiscard]] double operator()(double x) const;
    /// u'(x) on the element containing x.
    [[nodiscard]] double derivative(double x) const;

    /// this := (1 - theta) this + theta other.
    void blend(const FeFunction& other, double theta);

private:
    MeshPtr mesh_;
    std::vector<double> values_;
    BoundaryCondition bc_;
};

/// Tridiagonal matrix over the interior nodes; row i couples i-1, i, i+1.
struct Tridiagonal {
    std::vector<double> lower; ///< lower[i] = A(i, i-1), lower[0] unused
    std::vector<double> diag;
    std::vector<double> upper; ///< upper[i] = A(i, i+1), upper[n-1] unused

    Tridiagonal() = default;
    explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

    [[nodiscard]] std::size_t size() const { return diag.size(); }
    [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
    [[nodiscard]] Tridiagonal transpose() const;
    [[nodiscard]] double max_abs() const;

    Tridiagonal& operator+=(const Tridiagonal& other);
    Tridiagonal& operator*=(double s);
};

[[nodiscard]] Tridiagonal operator+(Tridiagonal lhs, const Tridiagonal& rhs);
[[nodiscard]] Tridiagonal operator*(double s, Tridiagonal m);

/// Pivots below this magnitude raise SingularMatrix.
inline constexpr double kPivotThreshold = 1e-14;

/// Thomas elimination with one step of iterative refinement.
[[nodiscard]] std::vector<double> solve_linear(const Tridiagonal& a, std::span<const double> rhs);

/// nu * integral of u' psi_i'.
[[nodiscard]] Tridiagonal assemble_diffusion(const Mesh1D& mesh, double nu);
/// Per-element diffusion coefficients nu_e.
[[nodiscard]] Tridiagonal assemble_diffusion(const Mesh1D& mesh, std::span<const double> nu_e);
/// (m, phi) -> integral of m drift phi'; rows are test functions phi_i.
[[nodiscard]] Tridiagonal assemble_advection(const Mesh1D& mesh, const ScalarField& drift);
/// (w, psi) -> integral of drift w' psi; equals the transpose of assemble_advection.
[[nodiscard]] Tridiagonal assemble_transport(const Mesh1D& mesh, const ScalarField& drift);
/// Exact P1 mass matrix.
[[nodiscard]] Tridiagonal assemble_mass(const Mesh1D& mesh);

/// Value and slope of a gradient nonlinearity G(x, p), e.g. H_lambda and dH_lambda/dp.
struct GradientNonlinearity {
    std::function<double(double, double)> value;
    std::function<double(double, double)> slope;
};

struct NonlinearForms {
    std::vector<double> residual; ///< integral of G(x, u') psi_i
    Tridiagonal tangent;          ///< integral of slope(x, u') w' psi_i
};

[[nodiscard]] NonlinearForms assemble_hjb_nonlinearity(const Mesh1D& mesh,
                                                       const GradientNonlinearity& g,
                                                       const FeFunction& u);

/// integral of g psi_i over interior nodes, 2-point Gauss per element.
[[nodiscard]] std::vector<double> load_vector(const Mesh1D& mesh, const ScalarField& g);

[[nodiscard]] FeFunction interpolate(MeshPtr mesh, const ScalarField& f,
                                     BoundaryCondition bc = BoundaryCondition::Dirichlet0);

[[nodiscard]] double l2_norm(const FeFunction& u);
[[nodiscard]] double h1_seminorm(const FeFunction& u);
[[nodiscard]] double h1_norm(const FeFunction& u);
/// ||u - v|| for functions on the same mesh; throws MeshMismatch otherwise.
[[nodiscard]] double l2_distance(const FeFunction& u, const FeFunction& v);
[[nodiscard]] double h1_distance(const FeFunction& u, const FeFunction& v);
[[nodiscard]] double h1_seminorm_distance(const FeFunction& u, const FeFunction& v);

/// ||u - f||_{L2} with a `points`-point Gauss rule per element.
[[nodiscard]] double l2_error(const FeFunction& u, const ScalarField& f, int points = 5);
/// ||u' - df||_{L2} with a `points`-point Gauss rule per element.
[[nodiscard]] double h1_seminorm_error(const FeFunction& u, const ScalarField& df,
                                       int points = 5);

[[nodiscard]] double norm2(std::span<const double> v);
[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);

/// CSV with header "x,value".
void write_csv(std::ostream& out, const FeFunction& u);
[[nodiscard]] FeFunction read_csv(std::istream& in,
                                  BoundaryCondition bc = BoundaryCondition::Dirichlet0);

} // namespace mfgpdi
