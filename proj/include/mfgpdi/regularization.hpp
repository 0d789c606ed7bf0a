#pragma once

#include "mfgpdi/hamiltonian.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace mfgpdi {

enum class RegularizationFamily { MoreauYosida, Mollified, Shifted71, Shifted72 };

[[nodiscard]] std::string to_string(RegularizationFamily family);
/// Accepts the CLI tags "my", "mollify", "shift71", "shift72".
[[nodiscard]] RegularizationFamily parse_family(std::string_view tag);

/// Absolute tolerance of the golden-section prox search.
inline constexpr double kProxTolerance = 1e-12;

/// argmin_q { H(x,q) + (q-p)^2 / (2 lambda) }.
///
/// Soft-thresholding for |p| and x|p|; golden-section search on
/// [p - lambda L_H, p + lambda L_H] otherwise. Throws NonConvergence when
/// the search ends up no better than the bracket ends (non-convex base).
[[nodiscard]] double prox(const Hamiltonian& base, double x, double lambda, double p);

/// Nonnegative bump supported in [-1, 1] together with its quadrature size.
struct MollifierSpec {
    std::string name;
    std::function<double(double)> profile;
    std::function<double(double)> derivative;
    int quad_nodes = 64;

    /// rho(q) proportional to cos^2(pi q / 2) on [-1, 1] (C^1 at the support edge, C^inf inside).
    static MollifierSpec cos_squared(int quad_nodes = 64);
};

/// Discrete convolution weights on [-1, 1]: sum(weights) == 1.
struct MollifierRule {
    std::vector<double> nodes;
    std::vector<double> weights;    ///< w_i rho(s_i) / Z
    std::vector<double> d_weights;  ///< w_i rho'(s_i) / Z
    double normalization = 1.0;     ///< Z = quadrature of rho before normalization
    double c_rho = 0.0;             ///< sum weights_i |s_i|
};

/// Throws QuadratureError when spec.quad_nodes < 3.
[[nodiscard]] MollifierRule build_rule(const MollifierSpec& spec);

/// Smooth surrogate H_lambda with its p-derivative and certified gap omega.
class RegularizedHamiltonian {
public:
    using ValueFn = std::function<double(double, double)>;

    RegularizedHamiltonian(Hamiltonian base, RegularizationFamily family, double lambda,
                           double omega, ValueFn value, ValueFn derivative);

    [[nodiscard]] double eval(double x, double p) const { return value_(x, p); }
    [[nodiscard]] double operator()(double x, double p) const { return value_(x, p); }
    /// dH_lambda/dp.
    [[nodiscard]] double dp(double x, double p) const { return derivative_(x, p); }

    [[nodiscard]] const Hamiltonian& base() const { return base_; }
    [[nodiscard]] RegularizationFamily family() const { return family_; }
    [[nodiscard]] double lambda() const { return lambda_; }
    /// Uniform bound on |H_lambda - H|.
    [[nodiscard]] double omega() const { return omega_; }

private:
    Hamiltonian base_;
    RegularizationFamily family_;
    double lambda_;
    double omega_;
    ValueFn value_;
    ValueFn derivative_;
};

/// Moreau-Yosida envelope; omega = L_H^2 lambda / 2.
[[nodiscard]] RegularizedHamiltonian moreau_yosida(const Hamiltonian& base, double lambda);

/// Convolution with rho_lambda; omega = C_rho L_H lambda with C_rho taken
/// under the same discrete rule that evaluates the convolution.
[[nodiscard]] RegularizedHamiltonian mollify(const Hamiltonian& base, double lambda,
                                             const MollifierSpec& mollifier);

/// Envelope of x|p| shifted by x cos(x/lambda) lambda; H_lambda(x,0) = 0 and
/// dH_lambda/dp(x,0) = -x cos(x/lambda). omega = 2 lambda.
[[nodiscard]] RegularizedHamiltonian shifted_71(double lambda);

/// Envelope of |p| shifted by cos(1/lambda) lambda. omega = 2 lambda.
[[nodiscard]] RegularizedHamiltonian shifted_72(double lambda);

/// Dispatch on family; the shifted families ignore `base`.
[[nodiscard]] RegularizedHamiltonian make_regularized(RegularizationFamily family,
                                                      const Hamiltonian& base, double lambda,
                                                      int quad_nodes = 64);

} // namespace mfgpdi
