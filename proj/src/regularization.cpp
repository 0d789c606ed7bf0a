#include "mfgpdi/regularization.hpp"

#include "mfgpdi/errors.hpp"
#include "mfgpdi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace mfgpdi {

namespace {

void check_lambda(double lambda)
{
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw InvalidArgument("regularization parameter must lie in (0, 1]");
}

double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

double soft_threshold(double p, double t) { return sign(p) * std::max(std::abs(p) - t, 0.0); }

// Closed-form envelope of t|p| (t >= 0) and its derivative.
double envelope_abs(double p, double t, double lambda)
{
    const double a = std::abs(p);
    return a >= lambda * t ? t * a - 0.5 * lambda * t * t : p * p / (2.0 * lambda);
}

double envelope_abs_dp(double p, double t, double lambda)
{
    return std::abs(p) >= lambda * t ? sign(p) * t : p / lambda;
}

double golden_section_prox(const Hamiltonian& base, double x, double lambda, double p)
{
    const double radius = lambda * base.lipschitz();
    if (radius == 0.0) return p;

    auto objective = [&](double q) { return base(x, q) + (q - p) * (q - p) / (2.0 * lambda); };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    const double tol = std::max(kProxTolerance, 8.0 * 2.2e-16 * (std::abs(p) + radius));

    double a = p - radius;
    double b = p + radius;
    const double fa0 = objective(a);
    const double fb0 = objective(b);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    int it = 0;
    for (; it < 400 && b - a > tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    if (b - a > tol) throw NonConvergence("prox: golden-section bracket did not contract");
    const double q = 0.5 * (a + b);
    const double fq = objective(q);
    const double slack = 1e-12 * (1.0 + std::abs(fq));
    if (fq > std::min(fa0, fb0) + slack)
        throw NonConvergence("prox: minimizer not interior to the bracket; base is not convex in p");
    return q;
}

// Bisection on the optimality inclusion 0 in q - p + lambda dH(q). Golden
// section compares objective values and stalls at ~sqrt(eps) relative
// accuracy where the objective is smooth; the inclusion test does not.
double refine_prox(const Hamiltonian& base, double x, double lambda, double p, double q)
{
    const double radius = lambda * base.lipschitz();
    auto side = [&](double z) {
        const Interval s = base.subdiff(x, z);
        if (z - p + lambda * s.hi < 0.0) return -1;
        if (z - p + lambda * s.lo > 0.0) return 1;
        return 0;
    };
    if (side(q) == 0) return q;
    const double w = 1e-6 * (1.0 + std::abs(q));
    double a = q - w, b = q + w;
    if (side(a) >= 0 || side(b) <= 0) {
        a = p - radius;
        b = p + radius;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const int sm = side(mid);
        if (sm == 0) return mid;
        (sm < 0 ? a : b) = mid;
    }
    return 0.5 * (a + b);
}

} // namespace

std::string to_string(RegularizationFamily family)
{
    switch (family) {
    case RegularizationFamily::MoreauYosida: return "moreau-yosida";
    case RegularizationFamily::Mollified: return "mollified";
    case RegularizationFamily::Shifted71: return "shifted-71";
    case RegularizationFamily::Shifted72: return "shifted-72";
    }
    return "unknown";
}

RegularizationFamily parse_family(std::string_view tag)
{
    if (tag == "my" || tag == "moreau-yosida") return RegularizationFamily::MoreauYosida;
    if (tag == "mollify" || tag == "mollified") return RegularizationFamily::Mollified;
    if (tag == "shift71" || tag == "shifted-71") return RegularizationFamily::Shifted71;
    if (tag == "shift72" || tag == "shifted-72") return RegularizationFamily::Shifted72;
    throw InvalidArgument("unknown regularization family '" + std::string(tag) + "'");
}

double prox(const Hamiltonian& base, double x, double lambda, double p)
{
    if (!(lambda > 0.0)) throw InvalidArgument("prox: lambda must be positive");
    switch (base.builtin()) {
    case BuiltIn::Abs: return soft_threshold(p, lambda);
    case BuiltIn::WeightedAbs:
        if (x >= 0.0) return soft_threshold(p, lambda * x);
        break;
    default: break;
    }
    const double q = golden_section_prox(base, x, lambda, p);
    const double r = refine_prox(base, x, lambda, p, q);
    auto objective = [&](double z) { return base(x, z) + (z - p) * (z - p) / (2.0 * lambda); };
    const double fq = objective(q);
    return objective(r) <= fq + 4.0 * 2.2e-16 * (1.0 + std::abs(fq)) ? r : q;
}

MollifierSpec MollifierSpec::cos_squared(int quad_nodes)
{
    MollifierSpec spec;
    spec.name = "cos2";
    spec.profile = [](double s) {
        if (std::abs(s) > 1.0) return 0.0;
        const double c = std::cos(0.5 * std::numbers::pi * s);
        return c * c;
    };
    spec.derivative = [](double s) {
        if (std::abs(s) > 1.0) return 0.0;
        return -0.5 * std::numbers::pi * std::sin(std::numbers::pi * s);
    };
    spec.quad_nodes = quad_nodes;
    return spec;
}

MollifierRule build_rule(const MollifierSpec& spec)
{
    if (spec.quad_nodes < 3)
        throw QuadratureError("mollifier quadrature needs at least 3 nodes");
    if (!spec.profile || !spec.derivative)
        throw InvalidArgument("mollifier needs a profile and its derivative");

    const QuadratureRule gl = gauss_legendre(spec.quad_nodes);
    MollifierRule rule;
    rule.nodes = gl.nodes;
    double z = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double rho = spec.profile(gl.nodes[i]);
        if (rho < 0.0) throw InvalidArgument("mollifier profile must be nonnegative");
        z += gl.weights[i] * rho;
    }
    if (!(z > 0.0)) throw QuadratureError("mollifier profile integrates to zero");
    rule.normalization = z;
    rule.weights.resize(gl.nodes.size());
    rule.d_weights.resize(gl.nodes.size());
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        rule.weights[i] = gl.weights[i] * spec.profile(gl.nodes[i]) / z;
        rule.d_weights[i] = gl.weights[i] * spec.derivative(gl.nodes[i]) / z;
        rule.c_rho += rule.weights[i] * std::abs(gl.nodes[i]);
    }
    return rule;
}

RegularizedHamiltonian::RegularizedHamiltonian(Hamiltonian base, RegularizationFamily family,
                                               double lambda, double omega, ValueFn value,
                                               ValueFn derivative)
    : base_(std::move(base)), family_(family), lambda_(lambda), omega_(omega),
      value_(std::move(value)), derivative_(std::move(derivative))
{
}

RegularizedHamiltonian moreau_yosida(const Hamiltonian& base, double lambda)
{
    check_lambda(lambda);
    const double omega = base.lipschitz() * base.lipschitz() * lambda / 2.0;

    if (base.builtin() == BuiltIn::Abs) {
        return {base, RegularizationFamily::MoreauYosida, lambda, omega,
                [lambda](double, double p) { return envelope_abs(p, 1.0, lambda); },
                [lambda](double, double p) { return envelope_abs_dp(p, 1.0, lambda); }};
    }
    if (base.builtin() == BuiltIn::WeightedAbs) {
        return {base, RegularizationFamily::MoreauYosida, lambda, omega,
                [lambda](double x, double p) { return envelope_abs(p, x, lambda); },
                [lambda](double x, double p) { return envelope_abs_dp(p, x, lambda); }};
    }
    auto value = [base, lambda](double x, double p) {
        const double q = prox(base, x, lambda, p);
        return base(x, q) + (q - p) * (q - p) / (2.0 * lambda);
    };
    auto derivative = [base, lambda](double x, double p) {
        return (p - prox(base, x, lambda, p)) / lambda;
    };
    return {base, RegularizationFamily::MoreauYosida, lambda, omega, value, derivative};
}

RegularizedHamiltonian mollify(const Hamiltonian& base, double lambda,
                               const MollifierSpec& mollifier)
{
    check_lambda(lambda);
    auto rule = std::make_shared<const MollifierRule>(build_rule(mollifier));
    const double omega = rule->c_rho * base.lipschitz() * lambda;

    auto value = [base, lambda, rule](double x, double p) {
        double sum = 0.0;
        for (std::size_t i = 0; i < rule->nodes.size(); ++i)
            sum += rule->weights[i] * base(x, p - lambda * rule->nodes[i]);
        return sum;
    };
    auto derivative = [base, lambda, rule](double x, double p) {
        // nodes are symmetric and rho' is odd: pair +-s to avoid cancelling p/lambda terms
        const std::size_t n = rule->nodes.size();
        double sum = 0.0;
        for (std::size_t i = 0; i < n / 2; ++i) {
            const double s = rule->nodes[i];
            const double w = 0.5 * (rule->d_weights[i] - rule->d_weights[n - 1 - i]);
            sum += w * (base(x, p - lambda * s) - base(x, p + lambda * s));
        }
        return sum / lambda;
    };
    return {base, RegularizationFamily::Mollified, lambda, omega, value, derivative};
}

RegularizedHamiltonian shifted_71(double lambda)
{
    check_lambda(lambda);
    auto shift = [lambda](double x) { return x * std::cos(x / lambda) * lambda; };
    auto value = [lambda, shift](double x, double p) {
        const double c = std::cos(x / lambda);
        return envelope_abs(p - shift(x), x, lambda) - x * x * c * c * lambda / 2.0;
    };
    auto derivative = [lambda, shift](double x, double p) {
        return envelope_abs_dp(p - shift(x), x, lambda);
    };
    return {Hamiltonian::weighted_absolute(), RegularizationFamily::Shifted71, lambda,
            2.0 * lambda, value, derivative};
}

RegularizedHamiltonian shifted_72(double lambda)
{
    check_lambda(lambda);
    const double c = std::cos(1.0 / lambda);
    const double shift = c * lambda;
    auto value = [lambda, c, shift](double, double p) {
        return envelope_abs(p - shift, 1.0, lambda) - c * c * lambda / 2.0;
    };
    auto derivative = [lambda, shift](double, double p) {
        return envelope_abs_dp(p - shift, 1.0, lambda);
    };
    return {Hamiltonian::absolute(), RegularizationFamily::Shifted72, lambda, 2.0 * lambda,
            value, derivative};
}

RegularizedHamiltonian make_regularized(RegularizationFamily family, const Hamiltonian& base,
                                        double lambda, int quad_nodes)
{
    switch (family) {
    case RegularizationFamily::MoreauYosida: return moreau_yosida(base, lambda);
    case RegularizationFamily::Mollified:
        return mollify(base, lambda, MollifierSpec::cos_squared(quad_nodes));
    case RegularizationFamily::Shifted71: return shifted_71(lambda);
    case RegularizationFamily::Shifted72: return shifted_72(lambda);
    }
    throw InvalidArgument("unknown regularization family");
}

} // namespace mfgpdi
