#pragma once

#include "mfgpdi/fem.hpp"
#include "mfgpdi/hamiltonian.hpp"
#include "mfgpdi/regularization.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mfgpdi {

struct HjbConfig {
    double tol_residual = 1e-10; ///< on the Euclidean norm of the discrete residual
    int max_iter = 100;
    double damping = 1.0; ///< initial Newton step length
    int max_halvings = 30;
};

struct HjbResult {
    FeFunction u;
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
    std::vector<double> residual_history;
};

/// H_lambda with its derivative.
[[nodiscard]] GradientNonlinearity nonlinearity(const RegularizedHamiltonian& reg);
/// Nonsmooth H with a fixed subgradient selection as the Newton slope.
[[nodiscard]] GradientNonlinearity nonlinearity(const Hamiltonian& ham,
                                                SelectionRule rule = SelectionRule::MinNorm);

/// r_i = nu (u', psi_i') + (G(u'), psi_i) - rhs_i.
[[nodiscard]] std::vector<double> hjb_residual(const Mesh1D& mesh, double nu,
                                               const GradientNonlinearity& g, const FeFunction& u,
                                               std::span<const double> rhs);

/// Damped (semismooth) Newton for nu(u',psi') + (G(x,u'),psi) = <rhs,psi>.
///
/// The initial guess defaults to the nu-Laplace solve with the same rhs. The
/// step is halved while the residual norm increases; when max_halvings is
/// exhausted or max_iter reached the best iterate is returned with
/// converged = false. Throws SingularTangent if the Newton matrix is singular.
[[nodiscard]] HjbResult solve_hjb(const MeshPtr& mesh, double nu, const GradientNonlinearity& g,
                                  std::span<const double> rhs, const HjbConfig& cfg = {},
                                  const std::optional<FeFunction>& initial = std::nullopt);

[[nodiscard]] HjbResult solve_hjb(const MeshPtr& mesh, double nu, const RegularizedHamiltonian& reg,
                                  std::span<const double> rhs, const HjbConfig& cfg = {},
                                  const std::optional<FeFunction>& initial = std::nullopt);

[[nodiscard]] HjbResult solve_hjb(const MeshPtr& mesh, double nu, const Hamiltonian& ham,
                                  std::span<const double> rhs, const HjbConfig& cfg = {},
                                  const std::optional<FeFunction>& initial = std::nullopt);

/// HJB forms for a regularized Hamiltonian.
[[nodiscard]] NonlinearForms assemble_hjb_nonlinearity(const Mesh1D& mesh,
                                                       const RegularizedHamiltonian& reg,
                                                       const FeFunction& u);

} // namespace mfgpdi
