#pragma once

#include "mfgpdi/fem.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfgpdi {

enum class CouplingKind { Zero, Identity, ScaledLocal, NonmonotoneEx33 };

/// Coupling operator F: density -> right-hand side of the HJB equation.
///
/// Declared constants are in the L2 setting: growth ||F[w]|| <= C_F (||w|| + 1),
/// strong monotonicity <F[a]-F[b], a-b> >= c_F ||a-b||^2, Lipschitz L_F.
class CouplingSpec {
public:
    static CouplingSpec zero();
    /// F[m] = m (c_F = 1).
    static CouplingSpec identity();
    /// F[m] = kappa m.
    static CouplingSpec scaled(double kappa);
    /// F[m] = (x^2/2 + 1) ||m - m2|| / ||m1 - m2|| + (x^2/2 - 1) ||m - m1|| / ||m1 - m2||
    /// with L2 norms on the mesh of m1. Not monotone.
    static CouplingSpec nonmonotone(FeFunction m1, FeFunction m2);

    /// The pointwise function F[m].
    [[nodiscard]] ScalarField field(const FeFunction& m) const;
    /// Load vector <F[m], psi_i>. Throws MeshMismatch for the nonmonotone kind
    /// when m is not on the mesh of its reference densities.
    [[nodiscard]] std::vector<double> apply(const FeFunction& m) const;

    [[nodiscard]] CouplingKind kind() const { return kind_; }
    [[nodiscard]] std::string name() const;
    [[nodiscard]] double growth_constant() const { return growth_; }
    [[nodiscard]] std::optional<double> strong_monotonicity() const { return strong_mono_; }
    [[nodiscard]] std::optional<double> lipschitz() const { return lipschitz_; }
    [[nodiscard]] double kappa() const { return kappa_; }

    /// Reference pair of the nonmonotone kind (nullptr otherwise).
    [[nodiscard]] const FeFunction* reference_m1() const;
    [[nodiscard]] const FeFunction* reference_m2() const;

private:
    CouplingSpec(CouplingKind kind, double growth, std::optional<double> strong_mono,
                 std::optional<double> lipschitz);

    struct Pair {
        FeFunction m1;
        FeFunction m2;
        double separation;
    };

    CouplingKind kind_;
    double growth_;
    std::optional<double> strong_mono_;
    std::optional<double> lipschitz_;
    double kappa_ = 1.0;
    std::shared_ptr<const Pair> pair_;
};

/// "zero", "identity", "scaled:<kappa>". "nonmono33" needs the Ex. reference
/// pair and is built by the experiments layer.
[[nodiscard]] CouplingSpec parse_coupling(std::string_view tag);

struct MonotonicityReport {
    int trials = 0;
    double min_quotient = 0.0; ///< min <F[a]-F[b], a-b> / ||a-b||^2
    double max_growth_ratio = 0.0; ///< max ||F[w]|| / (||w|| + 1) over sampled w
};

/// Random smooth density pairs (seeded); the nonmonotone kind also includes
/// its reference pair. The pairing is the load vector against nodal values.
[[nodiscard]] MonotonicityReport test_monotonicity(const CouplingSpec& spec, const MeshPtr& mesh,
                                                   int trials, std::uint64_t seed = 20240601);

/// <F[a]-F[b], a-b> / ||a-b||^2_{L2}.
[[nodiscard]] double monotonicity_quotient(const CouplingSpec& spec, const FeFunction& a,
                                           const FeFunction& b);

} // namespace mfgpdi
