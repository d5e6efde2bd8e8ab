#include "wakefsi/fsi_problems.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "wakefsi/error.hpp"

namespace wakefsi {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double ramp_scale(const FsiProblem& p, int step) {
    if (p.ramp_steps <= 0) return 1.0;
    const double remaining = std::max(0.0, 1.0 - static_cast<double>(step) / p.ramp_steps);
    return 1.0 + (p.ramp_factor - 1.0) * remaining;
}

StructuralSystem base_system(const FsiProblem& p) {
    return p.kind == FsiProblemKind::Piston ? piston_system(p.piston) : chain_system(p.chain);
}

}  // namespace

void FsiProblem::validate() const {
    newmark.validate();
    coupling.validate();
    require(std::isfinite(end_time) && end_time > 0.0, ErrorCode::InvalidArgument,
            "fsi: end_time must be > 0");
    require(ramp_steps >= 0, ErrorCode::InvalidArgument, "fsi: ramp_steps must be >= 0");
    require(std::isfinite(ramp_factor) && ramp_factor >= 1.0, ErrorCode::InvalidArgument,
            "fsi: ramp_factor must be >= 1");
    if (kind == FsiProblemKind::Piston) {
        require(piston.mass > 0.0, ErrorCode::InvalidArgument, "piston: mass must be > 0");
        require(piston.stiffness >= 0.0, ErrorCode::InvalidArgument, "piston: stiffness must be >= 0");
        require(piston.damping >= 0.0, ErrorCode::InvalidArgument, "piston: damping must be >= 0");
        require(piston.added_mass >= 0.0, ErrorCode::InvalidArgument, "piston: added_mass must be >= 0");
    } else {
        require(chain.nodes >= 1, ErrorCode::InvalidArgument, "chain: nodes must be >= 1");
        require(chain.node_mass > 0.0, ErrorCode::InvalidArgument, "chain: node_mass must be > 0");
        require(chain.stiffness > 0.0, ErrorCode::InvalidArgument, "chain: stiffness must be > 0");
        require(chain.damping_alpha >= 0.0, ErrorCode::InvalidArgument,
                "chain: damping_alpha must be >= 0");
    }
}

StructuralSystem piston_system(const PistonParams& p) {
    StructuralSystem s;
    s.mass = Eigen::MatrixXd::Constant(1, 1, p.mass);
    s.damping = Eigen::MatrixXd::Constant(1, 1, p.damping);
    s.stiffness = Eigen::MatrixXd::Constant(1, 1, p.stiffness);
    return s;
}

StructuralSystem chain_system(const ChainParams& p) {
    const Eigen::Index n = p.nodes;
    StructuralSystem s;
    s.mass = p.node_mass * Eigen::MatrixXd::Identity(n, n);
    s.damping = p.damping_alpha * s.mass;
    s.stiffness = Eigen::MatrixXd::Zero(n, n);
    // Spring i joins node i to node i-1 (node -1 is the clamp).
    for (Eigen::Index i = 0; i < n; ++i) {
        s.stiffness(i, i) += p.stiffness;
        if (i > 0) {
            s.stiffness(i - 1, i - 1) += p.stiffness;
            s.stiffness(i - 1, i) -= p.stiffness;
            s.stiffness(i, i - 1) -= p.stiffness;
        }
    }
    return s;
}

std::unique_ptr<FluidSurrogate> make_surrogate(const FsiProblem& problem) {
    if (problem.kind == FsiProblemKind::Piston)
        return std::make_unique<AddedMassPiston>(problem.piston.added_mass);
    if (problem.chain.load == ChainLoad::Constant)
        return std::make_unique<ConstantLoad>(
            Eigen::VectorXd::Constant(problem.chain.nodes, problem.chain.constant_load));
    return std::make_unique<QuasiSteadyAero>(problem.chain.aero);
}

FsiHistory run_fsi(const FsiProblem& problem) {
    problem.validate();
    const StructuralSystem base = base_system(problem);
    const auto fluid = make_surrogate(problem);
    const Eigen::Index n = base.dofs();
    const double dt = problem.newmark.dt;
    const auto steps = static_cast<int>(std::ceil(problem.end_time / dt - 1e-9));

    auto system_at = [&](int step) {
        StructuralSystem s = base;
        s.stiffness *= ramp_scale(problem, step);
        return s;
    };

    Eigen::VectorXd d0 = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(n);
    if (problem.kind == FsiProblemKind::Piston) {
        d0(0) = problem.piston.d0;
        v0(0) = problem.piston.v0;
    }

    // The start-up acceleration always uses relaxed Aitken iteration, even
    // when the time loop runs unrelaxed.
    CouplingConfig start_cfg;
    start_cfg.tol = 1e-12;
    start_cfg.relative_residual = true;
    start_cfg.max_inner = 200;
    start_cfg.omega_min = 1e-3;
    NewmarkState state = coupled_initial_state(system_at(0), d0, v0, *fluid, start_cfg);

    FsiHistory h;
    auto record = [&](const NewmarkState& s, const Eigen::VectorXd& f, int iters) {
        h.t.push_back(s.t);
        h.d.push_back(s.d);
        h.v.push_back(s.v);
        h.a.push_back(s.a);
        h.force.push_back(f);
        h.inner_iterations.push_back(iters);
    };
    record(state, fluid->force({state.d, state.v, state.a, state.t}), 0);

    std::unique_ptr<NewmarkIntegrator> integrator;
    double current_scale = -1.0;
    for (int step = 1; step <= steps; ++step) {
        const double scale = ramp_scale(problem, step);
        if (scale != current_scale) {
            integrator = std::make_unique<NewmarkIntegrator>(system_at(step), problem.newmark);
            current_scale = scale;
        }
        CoupledStepResult r;
        try {
            r = coupled_step(*integrator, state, *fluid, problem.coupling);
        } catch (const Error& e) {
            // Unconverged steps are carried forward; once they overflow the
            // run is cut short rather than losing the history.
            if (e.code() != ErrorCode::Numerical || h.trace.all_converged()) throw;
            h.aborted = "step " + std::to_string(step) + ": " + e.what();
            break;
        }
        state = std::move(r.state);
        // Keep the step count exact; accumulate time by index.
        state.t = step * dt;
        record(state, r.interface_force, r.trace.iterations);
        h.trace.steps.push_back(std::move(r.trace));
    }
    return h;
}

void write_history_csv(const FsiHistory& h, const fs::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write " + file.string());
    const Eigen::Index n = h.d.empty() ? 0 : h.d.front().size();
    out << "t";
    for (Eigen::Index i = 0; i < n; ++i) out << ",d" << i;
    for (Eigen::Index i = 0; i < n; ++i) out << ",v" << i;
    out << ",inner_iters,residual_final,omega_final\n";
    for (std::size_t row = 0; row < h.t.size(); ++row) {
        out << num(h.t[row]);
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << num(h.d[row](i));
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << num(h.v[row](i));
        if (row == 0) {
            out << ",0,0,0\n";
            continue;
        }
        const StepTrace& tr = h.trace.steps[row - 1];
        out << ',' << tr.iterations << ',' << num(tr.residuals.empty() ? 0.0 : tr.residuals.back())
            << ',' << num(tr.omegas.empty() ? 0.0 : tr.omegas.back()) << '\n';
    }
    if (!out) fail(ErrorCode::Io, "write failed for " + file.string());
}

void write_trace_csv(const FsiHistory& h, const fs::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write " + file.string());
    out << "step,t,iteration,residual,omega,converged\n";
    for (std::size_t s = 0; s < h.trace.steps.size(); ++s) {
        const StepTrace& tr = h.trace.steps[s];
        for (std::size_t k = 0; k < tr.residuals.size(); ++k)
            out << s + 1 << ',' << num(h.t[s + 1]) << ',' << k + 1 << ',' << num(tr.residuals[k])
                << ',' << num(tr.omegas[k]) << ',' << (tr.converged ? 1 : 0) << '\n';
    }
    if (!out) fail(ErrorCode::Io, "write failed for " + file.string());
}

}  // namespace wakefsi
