#include "mfgpdi/coupling.hpp"

#include "mfgpdi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace mfgpdi {

namespace {

double l2_of(const MeshPtr& mesh, const ScalarField& f)
{
    return l2_error(FeFunction::zero(mesh), f);
}

FeFunction random_density(const MeshPtr& mesh, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const int modes = 6;
    std::vector<double> c(modes);
    for (int k = 0; k < modes; ++k) c[static_cast<std::size_t>(k)] = normal(rng) / (k + 1);
    const double a = mesh->a();
    const double len = mesh->b() - a;
    return interpolate(mesh, [&](double x) {
        double s = 0.0;
        for (int k = 0; k < modes; ++k)
            s += c[static_cast<std::size_t>(k)] * std::sin((k + 1) * std::numbers::pi * (x - a) / len);
        return s;
    });
}

} // namespace

CouplingSpec::CouplingSpec(CouplingKind kind, double growth, std::optional<double> strong_mono,
                           std::optional<double> lipschitz)
    : kind_(kind), growth_(growth), strong_mono_(strong_mono), lipschitz_(lipschitz)
{
}

CouplingSpec CouplingSpec::zero() { return {CouplingKind::Zero, 0.0, std::nullopt, 0.0}; }

CouplingSpec CouplingSpec::identity() { return {CouplingKind::Identity, 1.0, 1.0, 1.0}; }

CouplingSpec CouplingSpec::scaled(double kappa)
{
    CouplingSpec spec(CouplingKind::ScaledLocal, std::abs(kappa),
                      kappa > 0.0 ? std::optional<double>(kappa) : std::nullopt, std::abs(kappa));
    spec.kappa_ = kappa;
    return spec;
}

CouplingSpec CouplingSpec::nonmonotone(FeFunction m1, FeFunction m2)
{
    const double separation = l2_distance(m1, m2);
    if (!(separation > 0.0)) throw InvalidArgument("nonmonotone coupling needs m1 != m2");
    const MeshPtr mesh = m1.mesh();
    const double g1 = l2_of(mesh, [](double x) { return x * x / 2.0 + 1.0; });
    const double g2 = l2_of(mesh, [](double x) { return x * x / 2.0 - 1.0; });
    const double lip = (g1 + g2) / separation;
    const double growth = lip * std::max({1.0, l2_norm(m1), l2_norm(m2)});

    CouplingSpec spec(CouplingKind::NonmonotoneEx33, growth, std::nullopt, lip);
    spec.pair_ = std::make_shared<const Pair>(Pair{std::move(m1), std::move(m2), separation});
    return spec;
}

std::string CouplingSpec::name() const
{
    switch (kind_) {
    case CouplingKind::Zero: return "zero";
    case CouplingKind::Identity: return "identity";
    case CouplingKind::ScaledLocal: return "scaled:" + std::to_string(kappa_);
    case CouplingKind::NonmonotoneEx33: return "nonmono33";
    }
    return "unknown";
}

const FeFunction* CouplingSpec::reference_m1() const { return pair_ ? &pair_->m1 : nullptr; }
const FeFunction* CouplingSpec::reference_m2() const { return pair_ ? &pair_->m2 : nullptr; }

ScalarField CouplingSpec::field(const FeFunction& m) const
{
    switch (kind_) {
    case CouplingKind::Zero: return [](double) { return 0.0; };
    case CouplingKind::Identity: return [m](double x) { return m(x); };
    case CouplingKind::ScaledLocal: return [m, k = kappa_](double x) { return k * m(x); };
    case CouplingKind::NonmonotoneEx33: {
        if (!pair_->m1.mesh()->same_nodes(*m.mesh()))
            throw MeshMismatch("nonmonotone coupling: density is not on the reference mesh");
        const double a = l2_distance(m, pair_->m2) / pair_->separation;
        const double b = l2_distance(m, pair_->m1) / pair_->separation;
        return [a, b](double x) { return (x * x / 2.0 + 1.0) * a + (x * x / 2.0 - 1.0) * b; };
    }
    }
    throw InvalidArgument("unknown coupling kind");
}

std::vector<double> CouplingSpec::apply(const FeFunction& m) const
{
    if (kind_ == CouplingKind::Zero) return std::vector<double>(m.mesh()->num_interior(), 0.0);
    return load_vector(*m.mesh(), field(m));
}

CouplingSpec parse_coupling(std::string_view tag)
{
    if (tag == "zero") return CouplingSpec::zero();
    if (tag == "identity") return CouplingSpec::identity();
    constexpr std::string_view scaled = "scaled:";
    if (tag.substr(0, scaled.size()) == scaled) {
        const std::string value(tag.substr(scaled.size()));
        try {
            return CouplingSpec::scaled(std::stod(value));
        } catch (const std::logic_error&) {
            throw InvalidArgument("bad coupling scale '" + value + "'");
        }
    }
    throw InvalidArgument("unknown coupling '" + std::string(tag) + "'");
}

double monotonicity_quotient(const CouplingSpec& spec, const FeFunction& a, const FeFunction& b)
{
    const std::vector<double> fa = spec.apply(a);
    const std::vector<double> fb = spec.apply(b);
    const std::vector<double> ia = a.interior();
    const std::vector<double> ib = b.interior();
    double pairing = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) pairing += (fa[i] - fb[i]) * (ia[i] - ib[i]);
    const double d = l2_distance(a, b);
    return pairing / (d * d);
}

MonotonicityReport test_monotonicity(const CouplingSpec& spec, const MeshPtr& mesh, int trials,
                                     std::uint64_t seed)
{
    if (trials < 1) throw InvalidArgument("test_monotonicity: trials must be >= 1");
    std::mt19937_64 rng(seed);
    MonotonicityReport report;
    report.min_quotient = std::numeric_limits<double>::infinity();

    auto growth_ratio = [&](const FeFunction& w) {
        return l2_of(w.mesh(), spec.field(w)) / (l2_norm(w) + 1.0);
    };
    auto record = [&](const FeFunction& a, const FeFunction& b) {
        if (l2_distance(a, b) == 0.0) return;
        report.min_quotient = std::min(report.min_quotient, monotonicity_quotient(spec, a, b));
        report.max_growth_ratio = std::max({report.max_growth_ratio, growth_ratio(a), growth_ratio(b)});
        ++report.trials;
    };

    MeshPtr target = mesh;
    if (const FeFunction* m1 = spec.reference_m1()) {
        target = m1->mesh();
        record(*m1, *spec.reference_m2());
    }
    while (report.trials < trials) record(random_density(target, rng), random_density(target, rng));
    return report;
}

} // namespace mfgpdi
