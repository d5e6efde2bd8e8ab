#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wakefsi/coupling.hpp"
#include "wakefsi/newmark.hpp"

namespace wakefsi {

enum class FsiProblemKind { Piston, CantileverChain };
enum class ChainLoad { Aero, Constant };

/// Single-dof structure under an added-mass fluid.
struct PistonParams {
    double mass = 1.0;
    double stiffness = 1.0;
    double damping = 0.0;
    double added_mass = 0.0;
    double d0 = 1.0;
    double v0 = 0.0;
};

/// Lumped-mass chain clamped at node -1: node i is tied to node i-1 by
/// `stiffness`, mass-proportional damping C = damping_alpha M.
struct ChainParams {
    int nodes = 8;
    double node_mass = 500.0;     // kg
    double stiffness = 2.0e5;     // N/m
    double damping_alpha = 1.0;   // 1/s
    ChainLoad load = ChainLoad::Aero;
    QuasiSteadyAeroParams aero;
    double constant_load = 100.0; // N per node
};

struct FsiProblem {
    FsiProblemKind kind = FsiProblemKind::Piston;
    PistonParams piston;
    ChainParams chain;
    NewmarkParams newmark;
    CouplingConfig coupling;
    double end_time = 1.0;
    /// Linear stiffness ramp: K starts at ramp_factor * K and relaxes to K
    /// over ramp_steps steps. ramp_steps = 0 disables it.
    int ramp_steps = 0;
    double ramp_factor = 1.0;

    void validate() const;
};

struct FsiHistory {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> d, v, a, force;
    std::vector<int> inner_iterations;
    CouplingTrace trace;
    // Set when the run stopped early after unconverged steps blew up.
    std::string aborted;
};

StructuralSystem piston_system(const PistonParams& p);
StructuralSystem chain_system(const ChainParams& p);

/// Fluid surrogate implied by the problem definition.
std::unique_ptr<FluidSurrogate> make_surrogate(const FsiProblem& problem);

/// Time-marches coupled_step from t = 0 to end_time. Row 0 of the history is
/// the initial state.
FsiHistory run_fsi(const FsiProblem& problem);

/// Columns: t, d0..d{n-1}, v0..v{n-1}, inner_iters, residual_final, omega_final.
void write_history_csv(const FsiHistory& h, const std::filesystem::path& file);

/// One row per inner iteration: step, t, iteration, residual, omega, converged.
void write_trace_csv(const FsiHistory& h, const std::filesystem::path& file);

}  // namespace wakefsi
