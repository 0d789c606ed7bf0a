#include "mfgpdi/hjb.hpp"

#include "mfgpdi/errors.hpp"

namespace mfgpdi {

GradientNonlinearity nonlinearity(const RegularizedHamiltonian& reg)
{
    return {[reg](double x, double p) { return reg.eval(x, p); },
            [reg](double x, double p) { return reg.dp(x, p); }};
}

GradientNonlinearity nonlinearity(const Hamiltonian& ham, SelectionRule rule)
{
    return {[ham](double x, double p) { return ham.eval(x, p); },
            [ham, rule](double x, double p) { return ham.select_subgradient(x, p, rule); }};
}

NonlinearForms assemble_hjb_nonlinearity(const Mesh1D& mesh, const RegularizedHamiltonian& reg,
                                         const FeFunction& u)
{
    return assemble_hjb_nonlinearity(mesh, nonlinearity(reg), u);
}

std::vector<double> hjb_residual(const Mesh1D& mesh, double nu, const GradientNonlinearity& g,
                                 const FeFunction& u, std::span<const double> rhs)
{
    if (rhs.size() != mesh.num_interior()) throw MeshMismatch("hjb_residual: rhs size mismatch");
    const Tridiagonal k = assemble_diffusion(mesh, nu);
    std::vector<double> r = k.apply(u.interior());
    const NonlinearForms forms = assemble_hjb_nonlinearity(mesh, g, u);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += forms.residual[i] - rhs[i];
    return r;
}

HjbResult solve_hjb(const MeshPtr& mesh, double nu, const GradientNonlinearity& g,
                    std::span<const double> rhs, const HjbConfig& cfg,
                    const std::optional<FeFunction>& initial)
{
    if (!(cfg.tol_residual > 0.0) || cfg.max_iter < 1)
        throw InvalidArgument("HjbConfig: need tol_residual > 0 and max_iter >= 1");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
        throw InvalidArgument("HjbConfig: damping must lie in (0, 1]");
    if (rhs.size() != mesh->num_interior()) throw MeshMismatch("solve_hjb: rhs size mismatch");

    const Tridiagonal k = assemble_diffusion(*mesh, nu);
    auto residual_of = [&](const FeFunction& u, NonlinearForms& forms) {
        forms = assemble_hjb_nonlinearity(*mesh, g, u);
        std::vector<double> r = k.apply(u.interior());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] += forms.residual[i] - rhs[i];
        return r;
    };

    FeFunction u = initial ? *initial : FeFunction::from_interior(mesh, solve_linear(k, rhs));
    if (u.mesh()->num_nodes() != mesh->num_nodes())
        throw MeshMismatch("solve_hjb: initial guess is on another mesh");

    NonlinearForms forms;
    std::vector<double> r = residual_of(u, forms);
    double rn = norm2(r);
    HjbResult result{u, false, 0, rn, {rn}};

    for (int it = 0; it < cfg.max_iter; ++it) {
        if (rn <= cfg.tol_residual) {
            result.converged = true;
            break;
        }
        Tridiagonal jac = k + forms.tangent;
        for (double& v : r) v = -v;
        std::vector<double> step;
        try {
            step = solve_linear(jac, r);
        } catch (const SingularMatrix& e) {
            throw SingularTangent(std::string("HJB Newton tangent: ") + e.what());
        }

        const std::vector<double> base = u.interior();
        double theta = cfg.damping;
        bool accepted = false;
        for (int halving = 0; halving <= cfg.max_halvings; ++halving, theta *= 0.5) {
            std::vector<double> trial = base;
            for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += theta * step[i];
            FeFunction u_trial = FeFunction::from_interior(mesh, trial);
            NonlinearForms trial_forms;
            std::vector<double> r_trial = residual_of(u_trial, trial_forms);
            const double rn_trial = norm2(r_trial);
            if (rn_trial <= rn) {
                u = std::move(u_trial);
                forms = std::move(trial_forms);
                r = std::move(r_trial);
                rn = rn_trial;
                accepted = true;
                break;
            }
        }
        result.iterations = it + 1;
        result.residual_history.push_back(rn);
        if (!accepted) break;
    }
    if (!result.converged && rn <= cfg.tol_residual) result.converged = true;
    result.u = std::move(u);
    result.residual_norm = rn;
    return result;
}

HjbResult solve_hjb(const MeshPtr& mesh, double nu, const RegularizedHamiltonian& reg,
                    std::span<const double> rhs, const HjbConfig& cfg,
                    const std::optional<FeFunction>& initial)
{
    return solve_hjb(mesh, nu, nonlinearity(reg), rhs, cfg, initial);
}

HjbResult solve_hjb(const MeshPtr& mesh, double nu, const Hamiltonian& ham,
                    std::span<const double> rhs, const HjbConfig& cfg,
                    const std::optional<FeFunction>& initial)
{
    return solve_hjb(mesh, nu, nonlinearity(ham), rhs, cfg, initial);
}

} // namespace mfgpdi
