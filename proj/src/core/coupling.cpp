#include "wakefsi/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "wakefsi/error.hpp"

namespace wakefsi {

AddedMassPiston::AddedMassPiston(double added_mass) : added_mass_(added_mass) {
    require(std::isfinite(added_mass) && added_mass >= 0.0, ErrorCode::InvalidArgument,
            "added_mass must be >= 0");
}

Eigen::VectorXd AddedMassPiston::force(const InterfaceKinematics& k) const {
    return -added_mass_ * k.a;
}

QuasiSteadyAero::QuasiSteadyAero(QuasiSteadyAeroParams p) : p_(p) {
    require(std::isfinite(p.rho) && p.rho > 0.0, ErrorCode::InvalidArgument, "rho must be > 0");
    require(std::isfinite(p.u_inf), ErrorCode::InvalidArgument, "u_inf must be finite");
    require(std::isfinite(p.chord) && p.chord > 0.0, ErrorCode::InvalidArgument, "chord must be > 0");
    require(std::isfinite(p.lift_coefficient), ErrorCode::InvalidArgument,
            "lift_coefficient must be finite");
    require(std::isfinite(p.span) && p.span > 0.0, ErrorCode::InvalidArgument, "span must be > 0");
}

Eigen::VectorXd QuasiSteadyAero::force(const InterfaceKinematics& k) const {
    const double coeff = 0.5 * p_.rho * p_.chord * p_.lift_coefficient * p_.span;
    Eigen::VectorXd f(k.v.size());
    for (Eigen::Index i = 0; i < k.v.size(); ++i) {
        const double v_rel = p_.u_inf - k.v(i);
        f(i) = coeff * v_rel * std::abs(v_rel);
    }
    return f;
}

ConstantLoad::ConstantLoad(Eigen::VectorXd load) : load_(std::move(load)) {
    require(load_.allFinite(), ErrorCode::NonFinite, "constant load must be finite");
}

Eigen::VectorXd ConstantLoad::force(const InterfaceKinematics& k) const {
    require(k.d.size() == load_.size(), ErrorCode::SizeMismatch,
            "constant load length differs from the interface size");
    return load_;
}

void CouplingConfig::validate() const {
    require(std::isfinite(tol) && tol > 0.0, ErrorCode::InvalidArgument, "coupling: tol must be > 0");
    require(max_inner >= 1, ErrorCode::InvalidArgument, "coupling: max_inner must be >= 1");
    require(omega_min > 0.0 && omega_min <= omega0 && omega0 <= omega_max && omega_max <= 2.0,
            ErrorCode::InvalidArgument,
            "coupling: need 0 < omega_min <= omega0 <= omega_max <= 2");
}

bool CouplingTrace::all_converged() const {
    return std::all_of(steps.begin(), steps.end(), [](const StepTrace& s) { return s.converged; });
}

double aitken_update(double omega_k, const Eigen::VectorXd& r_k, const Eigen::VectorXd& r_k1,
                     const CouplingConfig& cfg) {
    require(r_k.size() == r_k1.size(), ErrorCode::SizeMismatch, "aitken_update: residual lengths differ");
    const Eigen::VectorXd diff = r_k1 - r_k;
    const double denom = diff.squaredNorm();
    if (denom == 0.0) return omega_k;
    const double raw = -omega_k * r_k.dot(diff) / denom;
    return std::clamp(raw, cfg.omega_min, cfg.omega_max);
}

FixedPointResult relaxed_fixed_point(
    const Eigen::VectorXd& x0, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& map,
    const CouplingConfig& cfg) {
    cfg.validate();
    FixedPointResult out;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd r_prev;
    double omega = cfg.omega0;

    for (int k = 1; k <= cfg.max_inner; ++k) {
        Eigen::VectorXd g = map(x);
        if (!g.allFinite())
            fail(ErrorCode::Numerical,
                 "coupling: non-finite interface value at inner iteration " + std::to_string(k));
        Eigen::VectorXd r = g - x;
        double res = r.norm();
        if (cfg.relative_residual) res /= std::max(g.norm(), 1e-300);

        out.trace.iterations = k;
        out.trace.residuals.push_back(res);
        out.x = x;
        out.mapped = g;
        if (res <= cfg.tol) {
            out.trace.omegas.push_back(omega);
            out.trace.converged = true;
            return out;
        }
        if (k > 1 && res > kDivergenceFactor * std::max(out.trace.residuals.front(), cfg.tol)) {
            out.trace.omegas.push_back(omega);
            return out;
        }
        if (cfg.aitken_enabled && k > 1) omega = aitken_update(omega, r_prev, r, cfg);
        out.trace.omegas.push_back(omega);
        x += omega * r;
        if (!x.allFinite())
            fail(ErrorCode::Numerical,
                 "coupling: non-finite relaxed iterate at inner iteration " + std::to_string(k));
        r_prev = std::move(r);
    }
    return out;
}

CoupledStepResult coupled_step(const NewmarkIntegrator& solid, const NewmarkState& s,
                               const FluidSurrogate& fluid, const CouplingConfig& cfg) {
    const double t_next = s.t + solid.params().dt;
    NewmarkState last;
    Eigen::VectorXd last_force;
    Eigen::VectorXd v_trial, a_trial;

    auto solid_response = [&](const Eigen::VectorXd& d_trial) -> Eigen::VectorXd {
        solid.kinematics_from_displacement(s, d_trial, v_trial, a_trial);
        last_force = fluid.force({d_trial, v_trial, a_trial, t_next});
        if (!last_force.allFinite())
            fail(ErrorCode::Numerical, "coupling: fluid surrogate returned a non-finite force");
        last = solid.step(s, last_force);
        return last.d;
    };

    FixedPointResult fp = relaxed_fixed_point(s.d, solid_response, cfg);
    return {std::move(last), std::move(last_force), std::move(fp.x), std::move(fp.trace)};
}

NewmarkState coupled_initial_state(const StructuralSystem& sys, const Eigen::VectorXd& d0,
                                   const Eigen::VectorXd& v0, const FluidSurrogate& fluid,
                                   const CouplingConfig& cfg, double t0) {
    sys.validate();
    require(d0.size() == sys.dofs() && v0.size() == sys.dofs(), ErrorCode::SizeMismatch,
            "coupled_initial_state: vector length differs from dof count");
    const Eigen::LLT<Eigen::MatrixXd> mass_llt(sys.mass);
    const Eigen::VectorXd internal = sys.damping * v0 + sys.stiffness * d0;
    auto accel = [&](const Eigen::VectorXd& a) -> Eigen::VectorXd {
        return mass_llt.solve(fluid.force({d0, v0, a, t0}) - internal);
    };
    const Eigen::VectorXd a_guess = mass_llt.solve(-internal);
    const FixedPointResult fp = relaxed_fixed_point(a_guess, accel, cfg);
    require(fp.trace.converged, ErrorCode::Numerical,
            "coupled_initial_state: initial acceleration did not converge");
    return {d0, v0, fp.mapped, t0};
}

double interface_residual(const Eigen::VectorXd& d_solid, const Eigen::VectorXd& d_fluid) {
    require(d_solid.size() == d_fluid.size(), ErrorCode::SizeMismatch,
            "interface_residual: length mismatch");
    return (d_solid - d_fluid).norm();
}

double force_imbalance(const Eigen::VectorXd& f_solid, const Eigen::VectorXd& f_fluid) {
    require(f_solid.size() == f_fluid.size(), ErrorCode::SizeMismatch,
            "force_imbalance: length mismatch");
    return (f_solid - f_fluid).norm();
}

}  // namespace wakefsi
