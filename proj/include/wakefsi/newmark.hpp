#pragma once

#include <Eigen/Dense>

namespace wakefsi {

/// M d'' + C d' + K d = F
struct StructuralSystem {
    Eigen::MatrixXd mass;
    Eigen::MatrixXd damping;
    Eigen::MatrixXd stiffness;

    Eigen::Index dofs() const { return mass.rows(); }

    /// M SPD, K symmetric PSD, C symmetric, all n x n.
    void validate() const;
};

struct NewmarkState {
    Eigen::VectorXd d, v, a;
    double t = 0.0;
};

struct NewmarkParams {
    double beta = 0.25;
    double gamma = 0.5;
    double dt = 0.01;

    void validate() const;
};

/// State with acceleration solved from M a = F - C v - K d.
NewmarkState initial_state(const StructuralSystem& sys, const Eigen::VectorXd& d0,
                           const Eigen::VectorXd& v0, const Eigen::VectorXd& force,
                           double t0 = 0.0);

/// Newmark-beta stepper holding the LU factorization of
/// M + gamma dt C + beta dt^2 K.
class NewmarkIntegrator {
public:
    NewmarkIntegrator(StructuralSystem sys, NewmarkParams params);

    const StructuralSystem& system() const { return sys_; }
    const NewmarkParams& params() const { return params_; }

    /// Advances one step under the end-of-step force.
    NewmarkState step(const NewmarkState& s, const Eigen::VectorXd& force) const;

    /// Displacement predictor d_n + dt v_n + dt^2 (1/2 - beta) a_n.
    Eigen::VectorXd predicted_displacement(const NewmarkState& s) const;

    /// End-of-step velocity and acceleration implied by a trial
    /// end-of-step displacement (requires beta > 0).
    void kinematics_from_displacement(const NewmarkState& s, const Eigen::VectorXd& d_next,
                                      Eigen::VectorXd& v_next, Eigen::VectorXd& a_next) const;

private:
    StructuralSystem sys_;
    NewmarkParams params_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// One-off step; refactorizes every call.
NewmarkState newmark_step(const StructuralSystem& sys, const NewmarkState& s,
                          const NewmarkParams& p, const Eigen::VectorXd& force);

}  // namespace wakefsi
