#pragma once

#include "mfgpdi/coupling.hpp"
#include "mfgpdi/fem.hpp"
#include "mfgpdi/hamiltonian.hpp"
#include "mfgpdi/hjb.hpp"
#include "mfgpdi/regularization.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mfgpdi {

enum class InitialDensity { Zero, KfpZeroDrift };

struct MfgConfig {
    double theta = 0.5;      ///< Picard damping in (0, 1]
    double outer_tol = 1e-10; ///< on ||m^{k+1} - m^k||_{L2}
    int max_outer = 500;
    std::variant<InitialDensity, FeFunction> initial_m = InitialDensity::KfpZeroDrift;
    HjbConfig hjb;
    bool stabilize = false;
};

struct MfgDiagnostics {
    double hjb_residual = 0.0;     ///< ||r_HJB||_2 of the returned pair
    double kfp_residual = 0.0;     ///< ||r_KFP||_2 of the returned pair
    double inclusion_defect = 0.0; ///< max dist(drift, subdifferential of the solved H)
    double min_density = 0.0;
    double last_increment = 0.0;
    int outer_iters = 0;
    bool converged = false;
    bool hjb_converged = true;
    bool peclet_warning = false;
    std::vector<double> increments;
};

struct MfgSolution {
    FeFunction u;
    FeFunction m;
    ScalarField drift;
    std::optional<double> lambda;
    MfgDiagnostics diagnostics;
};

/// Damped Picard iteration m <- (1 - theta) m + theta KFP(drift(HJB(F[m]))) for
/// the regularized system. The returned pair is u = HJB(F[m]) and
/// m = KFP(dH_lambda/dp(., u')), and the diagnostics are recomputed from it.
/// Throws Diverged when the increment grows tenfold over 5 consecutive steps.
[[nodiscard]] MfgSolution solve_mfg(const MeshPtr& mesh, double nu,
                                    const RegularizedHamiltonian& reg,
                                    const CouplingSpec& coupling, const ScalarField& source,
                                    const MfgConfig& cfg = {});

/// Same iteration for the nonsmooth system: the HJB tangent and the KFP drift
/// use the min-norm subgradient of `ham`.
[[nodiscard]] MfgSolution solve_mfg(const MeshPtr& mesh, double nu, const Hamiltonian& ham,
                                    const CouplingSpec& coupling, const ScalarField& source,
                                    const MfgConfig& cfg = {});

/// max over Gauss points of dist(drift(x), subdiff H(x, u'(x))).
[[nodiscard]] double pdi_inclusion_defect(const FeFunction& u, const ScalarField& drift,
                                          const Hamiltonian& ham);

/// Divergence rule of the Picard loop: the last 5 increments each grew and the
/// newest is at least 10 times the one before the run.
[[nodiscard]] bool picard_increments_diverging(std::span<const double> increments);

/// Drift x -> slope(x, u'(x)).
[[nodiscard]] ScalarField realized_drift(const FeFunction& u, const GradientNonlinearity& g);

struct RateRow {
    double lambda = 0.0;
    double omega = 0.0;
    double err_u_h1 = 0.0;
    double err_m_l2 = 0.0;
    int outer_iters = 0;
    bool valid = false;

    [[nodiscard]] double total() const { return err_u_h1 + err_m_l2; }
};

struct RateReport {
    std::string family;
    std::vector<RateRow> rows;
    /// Least-squares slope of log(err_u + err_m) against log(omega), valid rows only.
    double slope = 0.0;
    /// max of err / omega^{1/2} over the largest third of the valid lambdas.
    double sqrt_constant = 0.0;

    /// Columns lambda,omega,err_u_h1,err_m_l2,slope[,config_hash].
    void write_csv(std::ostream& out, const std::string& config_hash = {}) const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Solve the regularized system for each lambda (concurrently when `parallel`)
/// and tabulate errors against a same-mesh reference solution.
[[nodiscard]] RateReport rate_study(const MeshPtr& mesh, double nu, const Hamiltonian& base,
                                    RegularizationFamily family, const CouplingSpec& coupling,
                                    const ScalarField& source, std::span<const double> lambdas,
                                    const MfgSolution& reference, const MfgConfig& cfg = {},
                                    int quad_nodes = 64, bool parallel = true);

/// Least-squares slope of log(y) against log(x) over positive pairs.
[[nodiscard]] double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

[[nodiscard]] nlohmann::json to_json(const MfgDiagnostics& d);

} // namespace mfgpdi
