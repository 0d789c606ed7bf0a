#pragma once

#include "mfgpdi/fem.hpp"
#include "mfgpdi/mfg_driver.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mfgpdi {

/// Settings shared by the canned experiments. Zero/empty fields fall back to
/// the experiment's defaults.
struct ExperimentConfig {
    std::string experiment; ///< ex33 | prop71 | prop72 | rate-my | rate-mollify
    std::size_t n = 0;      ///< mesh elements
    double nu = 1.0;
    std::vector<double> lambdas;
    std::vector<int> js;
    std::vector<std::size_t> ns; ///< refinement sequence (ex33)
    double theta = 0.0;
    double outer_tol = 0.0;
    int max_outer = 0;
    int quad_nodes = 64;
    std::filesystem::path out;

    /// Throws InvalidArgument on an unknown experiment, n < 16 (when set) or nu <= 0.
    void validate() const;
    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] static ExperimentConfig from_json(const nlohmann::json& j);
    /// Hex FNV-1a 64 of the canonical JSON dump (output path excluded).
    [[nodiscard]] std::string hash() const;
};

/// Two exact solution pairs of the nonmonotone example on (-1, 1), nu = 1.
struct Ex33Oracle {
    double a = -1.0;
    double b = 1.0;
    ScalarField u1, m1, u2, m2;
    ScalarField du1, dm1, du2, dm2;
};

[[nodiscard]] Ex33Oracle oracle_ex33();

/// Coupling of the nonmonotone example with reference densities interpolated on `mesh`.
[[nodiscard]] CouplingSpec ex33_coupling(const MeshPtr& mesh);

struct Ex33ResidualRow {
    std::size_t n = 0;
    double h = 0.0;
    double residual_pair1 = 0.0; ///< ||(r_HJB, r_KFP)||_2 of the interpolated pair 1
    double residual_pair2 = 0.0;
};

struct Ex33SolveRow {
    std::size_t n = 0;
    double h = 0.0;
    int start = 1; ///< which exact density the initial guess was near
    bool converged = false;
    int outer_iters = 0;
    double dist_m1_l2 = 0.0;
    double dist_m2_l2 = 0.0;
    double err_h1 = 0.0; ///< ||u-u_i||_{H1} + ||m-m_i||_{H1} against the start pair
    int approached = 0;  ///< 1 or 2: the nearer exact pair in L2
};

struct Ex33Report {
    std::vector<Ex33ResidualRow> residuals;
    std::vector<double> residual_orders_pair1;
    std::vector<double> residual_orders_pair2;
    double separation_l2 = 0.0; ///< ||m1 - m2||_{L2(-1,1)} by quadrature
    double drift_check = 0.0;   ///< max |dH/dp(u_i') - u_i'| over both pairs
    std::vector<Ex33SolveRow> solves;
    double inclusion_defect = 0.0;

    [[nodiscard]] nlohmann::json to_json() const;
    void write_csv(std::ostream& out, const std::string& config_hash) const;
};

struct Prop71Row {
    int j = 0;
    double lambda = 0.0;
    std::size_t n = 0;
    double l2_error = 0.0;         ///< ||m_j - m||_{L2}, m = x(1-x)/(2 nu)
    double h1_semi_error_sq = 0.0; ///< ||(m_j - m)'||^2_{L2}
    double oracle_l2 = 0.0;        ///< ||m_j - closed form m_j||_{L2}
    double u_max_abs = 0.0;
    double inclusion_defect = 0.0;
    double base_inclusion_defect = 0.0; ///< against the subdifferential of x|p|
    bool converged = false;
    int outer_iters = 0;
};

struct Prop71Report {
    double limit_value = 0.0; ///< 1 / (840 nu^4)
    std::vector<Prop71Row> rows;

    [[nodiscard]] nlohmann::json to_json() const;
    void write_csv(std::ostream& out, const std::string& config_hash) const;
};

struct Prop72Row {
    int j = 0;
    double lambda = 0.0;
    double expected_drift = 0.0;     ///< (-1)^{j+1}
    bool drift_exact = false;        ///< drift == expected at every Gauss point
    double oracle_l2 = 0.0;          ///< ||m_j - constant-drift closed form||_{L2}
    double parity_spread_l2 = 0.0;   ///< ||m_j - m_{first j of same parity}||_{L2}
    double u_max_abs = 0.0;
    double inclusion_defect = 0.0;
    double base_inclusion_defect = 0.0;
    bool converged = false;
    int outer_iters = 0;
};

struct Prop72Report {
    std::size_t n = 0;
    std::vector<Prop72Row> rows;
    double across_parity_l2 = 0.0;        ///< discrete ||m_odd - m_even||
    double across_parity_oracle_l2 = 0.0; ///< same between the closed forms

    [[nodiscard]] nlohmann::json to_json() const;
    void write_csv(std::ostream& out, const std::string& config_hash) const;
};

/// Closed-form density for G = 1 on (0,1) with constant drift `b` (= +-1) and diffusion nu.
[[nodiscard]] ScalarField constant_drift_density(double b, double nu);

/// Density for drift -x cos(jx), G = 1, on (0,1) from the integrating-factor formula.
[[nodiscard]] ScalarField oscillating_drift_density(int j, double nu);

[[nodiscard]] Ex33Report run_ex33(const ExperimentConfig& cfg);
/// Throws MeshTooCoarse if cfg.n is set below 20 max(j).
[[nodiscard]] Prop71Report run_prop71(const ExperimentConfig& cfg);
[[nodiscard]] Prop72Report run_prop72(const ExperimentConfig& cfg);
/// rate-my or rate-mollify: identity coupling, base |p|, G = 1.
[[nodiscard]] RateReport run_rate(const ExperimentConfig& cfg);

/// Measured order log(e_k / e_{k+1}) / log(h_k / h_{k+1}).
[[nodiscard]] std::vector<double> observed_orders(const std::vector<double>& h,
                                                  const std::vector<double>& err);

} // namespace mfgpdi
