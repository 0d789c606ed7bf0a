#include "mfgpdi/fem.hpp"

#include "mfgpdi/errors.hpp"
#include "mfgpdi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace mfgpdi {

namespace {

const double kGaussOffset = 0.5 / std::sqrt(3.0);

// Adds a 2x2 element block to the interior-node matrix; local index 0 is
// node e, 1 is node e+1. Rows/columns on the boundary are dropped.
void scatter(Tridiagonal& m, std::size_t e, std::size_t n_nodes, const double (&block)[2][2])
{
    for (int a = 0; a < 2; ++a) {
        const std::size_t row = e + static_cast<std::size_t>(a);
        if (row == 0 || row == n_nodes - 1) continue;
        const std::size_t i = row - 1;
        for (int b = 0; b < 2; ++b) {
            const std::size_t col = e + static_cast<std::size_t>(b);
            if (col == 0 || col == n_nodes - 1) continue;
            if (col == row) m.diag[i] += block[a][b];
            else if (col < row) m.lower[i] += block[a][b];
            else m.upper[i] += block[a][b];
        }
    }
}

void scatter(std::vector<double>& v, std::size_t e, std::size_t n_nodes, const double (&local)[2])
{
    for (int a = 0; a < 2; ++a) {
        const std::size_t row = e + static_cast<std::size_t>(a);
        if (row == 0 || row == n_nodes - 1) continue;
        v[row - 1] += local[a];
    }
}

void require_same_mesh(const FeFunction& u, const FeFunction& v)
{
    if (u.mesh() != v.mesh() && !u.mesh()->same_nodes(*v.mesh()))
        throw MeshMismatch("functions live on different meshes");
}

std::vector<double> thomas(const Tridiagonal& a, std::span<const double> rhs)
{
    const std::size_t n = a.size();
    std::vector<double> c(n, 0.0);
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double lower = i > 0 ? a.lower[i] : 0.0;
        const double pivot = a.diag[i] - (i > 0 ? lower * c[i - 1] : 0.0);
        if (std::abs(pivot) < kPivotThreshold)
            throw SingularMatrix("tridiagonal pivot " + std::to_string(pivot) + " at row " +
                                 std::to_string(i));
        c[i] = i + 1 < n ? a.upper[i] / pivot : 0.0;
        d[i] = (rhs[i] - (i > 0 ? lower * d[i - 1] : 0.0)) / pivot;
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t k = n; k-- > 0;) x[k] = d[k] - (k + 1 < n ? c[k] * x[k + 1] : 0.0);
    return x;
}

} // namespace

// ---------------------------------------------------------------- Mesh1D

Mesh1D::Mesh1D(std::vector<double> nodes) : nodes_(std::move(nodes))
{
    if (nodes_.size() < 3) throw InvalidArgument("mesh needs at least two elements");
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        if (!(nodes_[i + 1] > nodes_[i]))
            throw InvalidArgument("mesh nodes must be strictly increasing");
    }
}

std::shared_ptr<const Mesh1D> Mesh1D::uniform(double a, double b, std::size_t elements)
{
    if (elements < 2) throw InvalidArgument("mesh needs at least two elements");
    std::vector<double> nodes(elements + 1);
    for (std::size_t i = 0; i <= elements; ++i)
        nodes[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(elements);
    nodes.back() = b;
    return std::make_shared<const Mesh1D>(std::move(nodes));
}

double Mesh1D::max_h() const
{
    double h_max = 0.0;
    for (std::size_t e = 0; e < num_elements(); ++e) h_max = std::max(h_max, h(e));
    return h_max;
}

std::size_t Mesh1D::locate(double x) const
{
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    if (it == nodes_.begin()) return 0;
    const auto e = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    return std::min(e, num_elements() - 1);
}

std::array<double, 2> Mesh1D::gauss_points(std::size_t e) const
{
    const double mid = 0.5 * (nodes_[e] + nodes_[e + 1]);
    const double off = kGaussOffset * h(e);
    return {mid - off, mid + off};
}

// ------------------------------------------------------------ FeFunction

FeFunction::FeFunction(MeshPtr mesh, std::vector<double> values, BoundaryCondition bc)
    : mesh_(std::move(mesh)), values_(std::move(values)), bc_(bc)
{
    if (!mesh_) throw InvalidArgument("FeFunction needs a mesh");
    if (values_.size() != mesh_->num_nodes())
        throw MeshMismatch("FeFunction: value count does not match the mesh");
    if (bc_ == BoundaryCondition::Dirichlet0 && (values_.front() != 0.0 || values_.back() != 0.0))
        throw InvalidArgument("FeFunction: Dirichlet-0 function with nonzero boundary value");
}

FeFunction FeFunction::zero(MeshPtr mesh)
{
    const std::size_t n = mesh->num_nodes();
    return {std::move(mesh), std::vector<double>(n, 0.0)};
}

FeFunction FeFunction::from_interior(MeshPtr mesh, std::span<const double> interior)
{
    if (interior.size() != mesh->num_interior())
        throw MeshMismatch("interior vector size does not match the mesh");
    std::vector<double> values(mesh->num_nodes(), 0.0);
    std::copy(interior.begin(), interior.end(), values.begin() + 1);
    return {std::move(mesh), std::move(values)};
}

std::vector<double> FeFunction::interior() const
{
    return {values_.begin() + 1, values_.end() - 1};
}

double FeFunction::slope(std::size_t e) const
{
    return (values_[e + 1] - values_[e]) / mesh_->h(e);
}

double FeFunction::operator()(double x) const
{
    const std::size_t e = mesh_->locate(x);
    const double t = (x - mesh_->node(e)) / mesh_->h(e);
    return (1.0 - t) * values_[e] + t * values_[e + 1];
}

double FeFunction::derivative(double x) const { return slope(mesh_->locate(x)); }

void FeFunction::blend(const FeFunction& other, double theta)
{
    require_same_mesh(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] = (1.0 - theta) * values_[i] + theta * other.values_[i];
}

// ----------------------------------------------------------- Tridiagonal

std::vector<double> Tridiagonal::apply(std::span<const double> x) const
{
    const std::size_t n = size();
    if (x.size() != n) throw MeshMismatch("Tridiagonal::apply: size mismatch");
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += lower[i] * x[i - 1];
        if (i + 1 < n) s += upper[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

Tridiagonal Tridiagonal::transpose() const
{
    const std::size_t n = size();
    Tridiagonal t(n);
    t.diag = diag;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        t.upper[i] = lower[i + 1];
        t.lower[i + 1] = upper[i];
    }
    return t;
}

double Tridiagonal::max_abs() const
{
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        m = std::max({m, std::abs(diag[i]), std::abs(i > 0 ? lower[i] : 0.0),
                      std::abs(i + 1 < size() ? upper[i] : 0.0)});
    }
    return m;
}

Tridiagonal& Tridiagonal::operator+=(const Tridiagonal& other)
{
    if (other.size() != size()) throw MeshMismatch("Tridiagonal sum: size mismatch");
    for (std::size_t i = 0; i < size(); ++i) {
        lower[i] += other.lower[i];
        diag[i] += other.diag[i];
        upper[i] += other.upper[i];
    }
    return *this;
}

Tridiagonal& Tridiagonal::operator*=(double s)
{
    for (std::size_t i = 0; i < size(); ++i) {
        lower[i] *= s;
        diag[i] *= s;
        upper[i] *= s;
    }
    return *this;
}

Tridiagonal operator+(Tridiagonal lhs, const Tridiagonal& rhs) { return lhs += rhs; }
Tridiagonal operator*(double s, Tridiagonal m) { return m *= s; }

std::vector<double> solve_linear(const Tridiagonal& a, std::span<const double> rhs)
{
    if (rhs.size() != a.size()) throw MeshMismatch("solve_linear: size mismatch");
    std::vector<double> x = thomas(a, rhs);
    std::vector<double> r = a.apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
    const std::vector<double> dx = thomas(a, r);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
    return x;
}

// -------------------------------------------------------------- assembly

Tridiagonal assemble_diffusion(const Mesh1D& mesh, double nu)
{
    if (!(nu > 0.0)) throw InvalidArgument("diffusion coefficient must be positive");
    return assemble_diffusion(mesh, std::vector<double>(mesh.num_elements(), nu));
}

Tridiagonal assemble_diffusion(const Mesh1D& mesh, std::span<const double> nu_e)
{
    if (nu_e.size() != mesh.num_elements())
        throw MeshMismatch("one diffusion coefficient per element expected");
    Tridiagonal k(mesh.num_interior());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double s = nu_e[e] / mesh.h(e);
        const double block[2][2] = {{s, -s}, {-s, s}};
        scatter(k, e, mesh.num_nodes(), block);
    }
    return k;
}

Tridiagonal assemble_advection(const Mesh1D& mesh, const ScalarField& drift)
{
    Tridiagonal a(mesh.num_interior());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double h = mesh.h(e);
        const double x0 = mesh.node(e);
        const double dphi[2] = {-1.0 / h, 1.0 / h};
        double block[2][2] = {};
        for (double xq : mesh.gauss_points(e)) {
            const double t = (xq - x0) / h;
            const double psi[2] = {1.0 - t, t};
            const double wb = 0.5 * h * drift(xq);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) block[i][j] += wb * psi[j] * dphi[i];
        }
        scatter(a, e, mesh.num_nodes(), block);
    }
    return a;
}

Tridiagonal assemble_transport(const Mesh1D& mesh, const ScalarField& drift)
{
    Tridiagonal t(mesh.num_interior());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double h = mesh.h(e);
        const double x0 = mesh.node(e);
        const double dpsi[2] = {-1.0 / h, 1.0 / h};
        double block[2][2] = {};
        for (double xq : mesh.gauss_points(e)) {
            const double t_loc = (xq - x0) / h;
            const double psi[2] = {1.0 - t_loc, t_loc};
            const double wb = 0.5 * h * drift(xq);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) block[i][j] += wb * dpsi[j] * psi[i];
        }
        scatter(t, e, mesh.num_nodes(), block);
    }
    return t;
}

Tridiagonal assemble_mass(const Mesh1D& mesh)
{
    Tridiagonal m(mesh.num_interior());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double h = mesh.h(e);
        const double block[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
        scatter(m, e, mesh.num_nodes(), block);
    }
    return m;
}

NonlinearForms assemble_hjb_nonlinearity(const Mesh1D& mesh, const GradientNonlinearity& g,
                                         const FeFunction& u)
{
    if (u.mesh()->num_nodes() != mesh.num_nodes())
        throw MeshMismatch("assemble_hjb_nonlinearity: u is on another mesh");
    NonlinearForms forms{std::vector<double>(mesh.num_interior(), 0.0),
                         Tridiagonal(mesh.num_interior())};
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double h = mesh.h(e);
        const double x0 = mesh.node(e);
        const double p = u.slope(e);
        const double dpsi[2] = {-1.0 / h, 1.0 / h};
        double local[2] = {};
        double block[2][2] = {};
        for (double xq : mesh.gauss_points(e)) {
            const double t = (xq - x0) / h;
            const double psi[2] = {1.0 - t, t};
            const double wv = 0.5 * h * g.value(xq, p);
            const double ws = 0.5 * h * g.slope(xq, p);
            for (int i = 0; i < 2; ++i) {
                local[i] += wv * psi[i];
                for (int j = 0; j < 2; ++j) block[i][j] += ws * dpsi[j] * psi[i];
            }
        }
        scatter(forms.residual, e, mesh.num_nodes(), local);
        scatter(forms.tangent, e, mesh.num_nodes(), block);
    }
    return forms;
}

std::vector<double> load_vector(const Mesh1D& mesh, const ScalarField& g)
{
    std::vector<double> f(mesh.num_interior(), 0.0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double h = mesh.h(e);
        const double x0 = mesh.node(e);
        double local[2] = {};
        for (double xq : mesh.gauss_points(e)) {
            const double t = (xq - x0) / h;
            const double wg = 0.5 * h * g(xq);
            local[0] += wg * (1.0 - t);
            local[1] += wg * t;
        }
        scatter(f, e, mesh.num_nodes(), local);
    }
    return f;
}

FeFunction interpolate(MeshPtr mesh, const ScalarField& f, BoundaryCondition bc)
{
    std::vector<double> values(mesh->num_nodes());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(mesh->node(i));
    if (bc == BoundaryCondition::Dirichlet0) {
        values.front() = 0.0;
        values.back() = 0.0;
    }
    return {std::move(mesh), std::move(values), bc};
}

// ----------------------------------------------------------------- norms

double l2_norm(const FeFunction& u)
{
    const Mesh1D& mesh = *u.mesh();
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double a = u.value(e);
        const double b = u.value(e + 1);
        sum += mesh.h(e) * (a * a + a * b + b * b) / 3.0;
    }
    return std::sqrt(sum);
}

double h1_seminorm(const FeFunction& u)
{
    const Mesh1D& mesh = *u.mesh();
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double s = u.slope(e);
        sum += mesh.h(e) * s * s;
    }
    return std::sqrt(sum);
}

double h1_norm(const FeFunction& u)
{
    return std::hypot(l2_norm(u), h1_seminorm(u));
}

namespace {

FeFunction difference(const FeFunction& u, const FeFunction& v)
{
    require_same_mesh(u, v);
    std::vector<double> d(u.values().size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = u.value(i) - v.value(i);
    return {u.mesh(), std::move(d), BoundaryCondition::Free};
}

} // namespace

double l2_distance(const FeFunction& u, const FeFunction& v) { return l2_norm(difference(u, v)); }
double h1_distance(const FeFunction& u, const FeFunction& v) { return h1_norm(difference(u, v)); }
double h1_seminorm_distance(const FeFunction& u, const FeFunction& v)
{
    return h1_seminorm(difference(u, v));
}

double l2_error(const FeFunction& u, const ScalarField& f, int points)
{
    const QuadratureRule rule = gauss_legendre(points);
    const Mesh1D& mesh = *u.mesh();
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double h = mesh.h(e);
        const double x0 = mesh.node(e);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = 0.5 * (rule.nodes[q] + 1.0);
            const double uh = (1.0 - t) * u.value(e) + t * u.value(e + 1);
            const double d = uh - f(x0 + t * h);
            sum += 0.5 * h * rule.weights[q] * d * d;
        }
    }
    return std::sqrt(sum);
}

double h1_seminorm_error(const FeFunction& u, const ScalarField& df, int points)
{
    const QuadratureRule rule = gauss_legendre(points);
    const Mesh1D& mesh = *u.mesh();
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double h = mesh.h(e);
        const double x0 = mesh.node(e);
        const double s = u.slope(e);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = 0.5 * (rule.nodes[q] + 1.0);
            const double d = s - df(x0 + t * h);
            sum += 0.5 * h * rule.weights[q] * d * d;
        }
    }
    return std::sqrt(sum);
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double dot(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw MeshMismatch("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// ------------------------------------------------------------------- CSV

void write_csv(std::ostream& out, const FeFunction& u)
{
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    out << "x,value\n";
    for (std::size_t i = 0; i < u.values().size(); ++i)
        out << u.mesh()->node(i) << ',' << u.value(i) << '\n';
    out.precision(old_precision);
}

FeFunction read_csv(std::istream& in, BoundaryCondition bc)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,value", 0) != 0)
        throw InvalidArgument("FeFunction CSV must start with header 'x,value'");
    std::vector<double> xs;
    std::vector<double> vs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidArgument("malformed CSV row: " + line);
        xs.push_back(std::stod(line.substr(0, comma)));
        vs.push_back(std::stod(line.substr(comma + 1)));
    }
    return {std::make_shared<const Mesh1D>(std::move(xs)), std::move(vs), bc};
}

} // namespace mfgpdi
