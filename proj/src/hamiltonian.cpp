#include "mfgpdi/hamiltonian.hpp"

#include "mfgpdi/errors.hpp"
#include "mfgpdi/expression.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace mfgpdi {

namespace {

Interval sign_interval(double p)
{
    if (p > 0.0) return {1.0, 1.0};
    if (p < 0.0) return {-1.0, -1.0};
    return {-1.0, 1.0};
}

} // namespace

Hamiltonian::Hamiltonian(std::string id, HamiltonianKind kind, double lipschitz, ValueFn value,
                         SubdiffFn subdiff, BuiltIn builtin)
    : id_(std::move(id)), kind_(kind), lipschitz_(lipschitz), value_(std::move(value)),
      subdiff_(std::move(subdiff)), builtin_(builtin)
{
    if (!(lipschitz_ >= 0.0)) throw InvalidArgument("Hamiltonian: Lipschitz constant must be >= 0");
    if (!value_ || !subdiff_) throw InvalidArgument("Hamiltonian: eval and subdiff are required");
}

Hamiltonian Hamiltonian::absolute()
{
    return {"abs", HamiltonianKind::Analytic, 1.0,
            [](double, double p) { return std::abs(p); },
            [](double, double p) { return sign_interval(p); }, BuiltIn::Abs};
}

Hamiltonian Hamiltonian::weighted_absolute()
{
    // L_H = sup |x a| over x in [0,1], a in [-1,1].
    return {"xabs", HamiltonianKind::Analytic, 1.0,
            [](double x, double p) { return x * std::abs(p); },
            [](double x, double p) {
                const Interval s = sign_interval(p);
                return x >= 0.0 ? Interval{x * s.lo, x * s.hi} : Interval{x * s.hi, x * s.lo};
            },
            BuiltIn::WeightedAbs};
}

Hamiltonian Hamiltonian::clipped_quadratic()
{
    return {"quad", HamiltonianKind::Analytic, 1.0,
            [](double, double p) {
                const double a = std::abs(p);
                return a <= 1.0 ? 0.5 * p * p : a - 0.5;
            },
            [](double, double p) {
                const double s = std::clamp(p, -1.0, 1.0);
                return Interval{s, s};
            },
            BuiltIn::ClippedQuadratic};
}

Hamiltonian Hamiltonian::from_controls(ControlSet set, std::string id, double x_lo, double x_hi,
                                       int samples)
{
    if (set.controls.empty()) throw InvalidArgument("control set must be nonempty");
    if (!set.drift || !set.cost) throw InvalidArgument("control set needs drift and cost");
    if (samples < 2 || !(x_hi >= x_lo)) throw InvalidArgument("control set: bad x sampling");

    double lip = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = x_lo + (x_hi - x_lo) * i / (samples - 1);
        for (double a : set.controls) lip = std::max(lip, std::abs(set.drift(x, a)));
    }

    auto shared = std::make_shared<const ControlSet>(std::move(set));
    auto value = [shared](double x, double p) {
        double best = -std::numeric_limits<double>::infinity();
        for (double a : shared->controls)
            best = std::max(best, shared->drift(x, a) * p - shared->cost(x, a));
        return best;
    };
    auto subdiff = [shared, value](double x, double p) {
        const double best = value(x, p);
        Interval hull{std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity()};
        for (double a : shared->controls) {
            const double b = shared->drift(x, a);
            if (b * p - shared->cost(x, a) >= best - kArgmaxTolerance) {
                hull.lo = std::min(hull.lo, b);
                hull.hi = std::max(hull.hi, b);
            }
        }
        return hull;
    };
    Hamiltonian h(std::move(id), HamiltonianKind::ControlSet, lip, value, subdiff);
    h.controls_ = shared;
    return h;
}

Hamiltonian Hamiltonian::load_controls(const std::filesystem::path& file, double x_lo,
                                       double x_hi)
{
    std::ifstream in(file);
    if (!in) throw InvalidArgument("cannot open control file " + file.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("control file " + file.string() + ": " + e.what());
    }
    if (!doc.contains("alphas") || !doc["alphas"].is_array())
        throw InvalidArgument("control file " + file.string() + ": missing array 'alphas'");

    ControlSet set;
    set.controls = doc["alphas"].get<std::vector<double>>();
    const Expression b(doc.value("b", std::string("a")));
    const Expression f(doc.value("f", std::string("0")));
    set.drift = [b](double x, double a) { return b(x, a); };
    set.cost = [f](double x, double a) { return f(x, a); };
    return from_controls(std::move(set), "control:" + file.string(), x_lo, x_hi);
}

Hamiltonian Hamiltonian::from_id(std::string_view id, double x_lo, double x_hi)
{
    if (id == "abs") return absolute();
    if (id == "xabs") return weighted_absolute();
    if (id == "quad") return clipped_quadratic();
    constexpr std::string_view prefix = "control:";
    if (id.substr(0, prefix.size()) == prefix)
        return load_controls(std::filesystem::path(std::string(id.substr(prefix.size()))), x_lo,
                             x_hi);
    throw InvalidArgument("unknown Hamiltonian id '" + std::string(id) + "'");
}

double Hamiltonian::select_subgradient(double x, double p, SelectionRule rule) const
{
    const Interval s = subdiff(x, p);
    switch (rule) {
    case SelectionRule::Left: return s.lo;
    case SelectionRule::Right: return s.hi;
    case SelectionRule::MinNorm: break;
    }
    return std::clamp(0.0, s.lo, s.hi);
}

} // namespace mfgpdi
