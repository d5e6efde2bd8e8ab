#include "wakefsi/newmark.hpp"

#include <cmath>

#include "wakefsi/error.hpp"

namespace wakefsi {

namespace {

// Below this reciprocal condition estimate the effective matrix is treated
// as singular.
constexpr double kSingularRcond = 1e-14;

bool is_symmetric(const Eigen::MatrixXd& m) {
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

}  // namespace

void StructuralSystem::validate() const {
    const Eigen::Index n = mass.rows();
    require(n >= 1, ErrorCode::InvalidArgument, "structural system: no degrees of freedom");
    for (const auto* m : {&mass, &damping, &stiffness})
        require(m->rows() == n && m->cols() == n, ErrorCode::SizeMismatch,
                "structural system: M, C, K must all be n x n");
    require(mass.allFinite() && damping.allFinite() && stiffness.allFinite(), ErrorCode::NonFinite,
            "structural system: non-finite matrix entry");
    require(is_symmetric(mass) && is_symmetric(damping) && is_symmetric(stiffness),
            ErrorCode::InvalidArgument, "structural system: M, C, K must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(mass);
    require(llt.info() == Eigen::Success, ErrorCode::InvalidArgument,
            "structural system: M must be positive definite");
    const double kmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(stiffness, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .minCoeff();
    require(kmin >= -1e-12 * std::max(stiffness.norm(), 1.0), ErrorCode::InvalidArgument,
            "structural system: K must be positive semidefinite");
}

void NewmarkParams::validate() const {
    require(beta >= 0.0 && beta <= 0.5, ErrorCode::InvalidArgument, "newmark: beta must lie in [0, 0.5]");
    require(gamma >= 0.0 && gamma <= 1.0, ErrorCode::InvalidArgument, "newmark: gamma must lie in [0, 1]");
    require(std::isfinite(dt) && dt > 0.0, ErrorCode::InvalidArgument, "newmark: dt must be > 0");
}

NewmarkState initial_state(const StructuralSystem& sys, const Eigen::VectorXd& d0,
                           const Eigen::VectorXd& v0, const Eigen::VectorXd& force, double t0) {
    sys.validate();
    require(d0.size() == sys.dofs() && v0.size() == sys.dofs() && force.size() == sys.dofs(),
            ErrorCode::SizeMismatch, "initial_state: vector length differs from dof count");
    NewmarkState s;
    s.d = d0;
    s.v = v0;
    s.a = sys.mass.llt().solve(force - sys.damping * v0 - sys.stiffness * d0);
    s.t = t0;
    return s;
}

NewmarkIntegrator::NewmarkIntegrator(StructuralSystem sys, NewmarkParams params)
    : sys_(std::move(sys)), params_(params) {
    sys_.validate();
    params_.validate();
    const double dt = params_.dt;
    const Eigen::MatrixXd effective =
        sys_.mass + params_.gamma * dt * sys_.damping + params_.beta * dt * dt * sys_.stiffness;
    lu_.compute(effective);
    require(lu_.rcond() > kSingularRcond, ErrorCode::Singular,
            "newmark: effective matrix M + gamma dt C + beta dt^2 K is singular");
}

Eigen::VectorXd NewmarkIntegrator::predicted_displacement(const NewmarkState& s) const {
    const double dt = params_.dt;
    return s.d + dt * s.v + dt * dt * (0.5 - params_.beta) * s.a;
}

NewmarkState NewmarkIntegrator::step(const NewmarkState& s, const Eigen::VectorXd& force) const {
    require(force.size() == sys_.dofs(), ErrorCode::SizeMismatch,
            "newmark_step: force length differs from dof count");
    const double dt = params_.dt;
    const double beta = params_.beta;
    const double gamma = params_.gamma;

    const Eigen::VectorXd v_pred = s.v + dt * (1.0 - gamma) * s.a;
    const Eigen::VectorXd d_pred = predicted_displacement(s);

    NewmarkState next;
    next.a = lu_.solve(force - sys_.damping * v_pred - sys_.stiffness * d_pred);
    next.v = v_pred + dt * gamma * next.a;
    next.d = d_pred + dt * dt * beta * next.a;
    next.t = s.t + dt;
    return next;
}

void NewmarkIntegrator::kinematics_from_displacement(const NewmarkState& s,
                                                     const Eigen::VectorXd& d_next,
                                                     Eigen::VectorXd& v_next,
                                                     Eigen::VectorXd& a_next) const {
    const double dt = params_.dt;
    require(params_.beta > 0.0, ErrorCode::InvalidArgument,
            "newmark: displacement-driven kinematics need beta > 0");
    a_next = (d_next - predicted_displacement(s)) / (params_.beta * dt * dt);
    v_next = s.v + dt * ((1.0 - params_.gamma) * s.a + params_.gamma * a_next);
}

NewmarkState newmark_step(const StructuralSystem& sys, const NewmarkState& s,
                          const NewmarkParams& p, const Eigen::VectorXd& force) {
    return NewmarkIntegrator(sys, p).step(s, force);
}

}  // namespace wakefsi
