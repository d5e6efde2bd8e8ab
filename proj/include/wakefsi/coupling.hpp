#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wakefsi/newmark.hpp"

namespace wakefsi {

/// Interface kinematics handed to a fluid surrogate.
struct InterfaceKinematics {
    const Eigen::VectorXd& d;
    const Eigen::VectorXd& v;
    const Eigen::VectorXd& a;
    double t;
};

/// Fluid side of the partition: interface motion in, interface force out.
class FluidSurrogate {
public:
    virtual ~FluidSurrogate() = default;
    virtual Eigen::VectorXd force(const InterfaceKinematics& k) const = 0;
    virtual std::string name() const = 0;
};

/// f = -m_a a on every dof.
class AddedMassPiston final : public FluidSurrogate {
public:
    explicit AddedMassPiston(double added_mass);
    Eigen::VectorXd force(const InterfaceKinematics& k) const override;
    std::string name() const override { return "added_mass_piston"; }
    double added_mass() const { return added_mass_; }

private:
    double added_mass_;
};

/// Per-node lift f = 1/2 rho |V_rel| V_rel c C_l span with V_rel = U - v.
struct QuasiSteadyAeroParams {
    double rho = 1.2;     // kg/m^3
    double u_inf = 11.4;  // m/s
    double chord = 3.5;   // m
    double lift_coefficient = 1.0;
    double span = 1.0;    // m of blade per node
};

class QuasiSteadyAero final : public FluidSurrogate {
public:
    explicit QuasiSteadyAero(QuasiSteadyAeroParams p);
    Eigen::VectorXd force(const InterfaceKinematics& k) const override;
    std::string name() const override { return "quasi_steady_aero"; }
    const QuasiSteadyAeroParams& params() const { return p_; }

private:
    QuasiSteadyAeroParams p_;
};

/// Motion-independent load.
class ConstantLoad final : public FluidSurrogate {
public:
    explicit ConstantLoad(Eigen::VectorXd load);
    Eigen::VectorXd force(const InterfaceKinematics& k) const override;
    std::string name() const override { return "constant_load"; }

private:
    Eigen::VectorXd load_;
};

struct CouplingConfig {
    double tol = 1e-8;
    int max_inner = 50;
    double omega0 = 0.5;
    double omega_min = 0.05;
    double omega_max = 1.0;
    bool aitken_enabled = true;
    /// Divide the residual norm by the norm of the current iterate.
    bool relative_residual = false;

    void validate() const;
};

struct StepTrace {
    int iterations = 0;
    std::vector<double> residuals;
    std::vector<double> omegas;
    bool converged = false;
};

struct CouplingTrace {
    std::vector<StepTrace> steps;

    bool all_converged() const;
};

/// Clamped Aitken relaxation factor
///   omega_{k+1} = -omega_k <r_k, r_{k+1} - r_k> / |r_{k+1} - r_k|^2.
/// Returns omega_k unchanged when the residual difference vanishes.
double aitken_update(double omega_k, const Eigen::VectorXd& r_k, const Eigen::VectorXd& r_k1,
                     const CouplingConfig& cfg);

struct FixedPointResult {
    Eigen::VectorXd x;        // last iterate fed to the map
    Eigen::VectorXd mapped;   // map(x)
    StepTrace trace;
};

/// Relaxed fixed-point iteration x <- x + omega (g(x) - x) until
/// |g(x) - x| <= tol. Non-finite iterates throw Numerical naming the
/// iteration. A residual that grows past kDivergenceFactor times the first
/// one ends the loop early with converged = false.
inline constexpr double kDivergenceFactor = 1e6;

FixedPointResult relaxed_fixed_point(
    const Eigen::VectorXd& x0,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& map,
    const CouplingConfig& cfg);

struct CoupledStepResult {
    NewmarkState state;
    Eigen::VectorXd interface_force;
    Eigen::VectorXd fluid_displacement;  // interface position the fluid last saw
    StepTrace trace;
};

/// One implicit partitioned step. The whole dof vector is the interface.
CoupledStepResult coupled_step(const NewmarkIntegrator& solid, const NewmarkState& s,
                               const FluidSurrogate& fluid, const CouplingConfig& cfg);

/// Consistent start: solves M a = F(d0, v0, a) - C v0 - K d0 for a with the
/// same relaxed iteration.
NewmarkState coupled_initial_state(const StructuralSystem& sys, const Eigen::VectorXd& d0,
                                   const Eigen::VectorXd& v0, const FluidSurrogate& fluid,
                                   const CouplingConfig& cfg, double t0 = 0.0);

/// |d_solid - d_fluid|
double interface_residual(const Eigen::VectorXd& d_solid, const Eigen::VectorXd& d_fluid);
/// |f_solid - f_fluid|
double force_imbalance(const Eigen::VectorXd& f_solid, const Eigen::VectorXd& f_fluid);

}  // namespace wakefsi
