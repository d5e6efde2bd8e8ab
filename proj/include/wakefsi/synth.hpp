#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wakefsi/field.hpp"

namespace wakefsi {

/// Parametric wake: Gaussian axial deficit behind the rotor disc, a helical
/// tip-vortex ring at blade-passing frequency and a laterally meandering
/// tower-wake strip below the hub. Rotor disc centered at
/// (rotor_x, 0, hub_height), flow along +x.
struct WakeModelParams {
    double u_inf = 11.4;               // m/s
    double rotor_rpm = 12.1;
    double rotor_diameter = 126.0;     // m
    double hub_height = 90.0;          // m
    double rotor_x = 0.0;              // m
    int blades = 3;
    double deficit_amplitude = 0.35;   // fraction of u_inf
    double deficit_growth = 0.04;      // wake width growth per metre downstream
    double tip_vortex_amplitude = 1.0; // m/s
    double tip_decay_length = 1000.0;  // m
    double tower_wake_amplitude = 1.5; // m/s
    double tower_strouhal = 0.2;
    double tower_diameter = 6.0;       // m
    std::uint64_t seed = 1;

    /// Throws InvalidArgument naming the offending field.
    void validate() const;

    double rotor_omega() const;            // rad/s
    double blade_passing_frequency() const;  // Hz
    double tower_shedding_frequency() const; // Hz
};

/// Wake velocity (u, v, w) at a point and time.
std::array<double, 3> wake_velocity(const WakeModelParams& p,
                                    const std::array<double, 3>& x, double t);

/// 3-component velocity field "u" evaluated at cell centers.
FieldSnapshot generate_wake_snapshot(const WakeModelParams& p, const StructuredGrid& grid,
                                     double t);

/// Snapshot set with one field named "u".
SnapshotSet generate_wake_set(const WakeModelParams& p, const StructuredGrid& grid,
                              const std::vector<double>& times);

/// Per-axis factor of a separable spatial shape on the cell-index lattice.
enum class Trig { Cos, Sin };

struct SpatialShape {
    std::array<int, 3> wavenumber{0, 0, 0};
    std::array<Trig, 3> kind{Trig::Cos, Trig::Cos, Trig::Cos};
};

enum class TemporalKind { Constant, Sine, Values };

struct TemporalCoefficient {
    TemporalKind kind = TemporalKind::Constant;
    double amplitude = 1.0;
    double frequency = 0.0;  // Hz, Sine only
    double phase = 0.0;      // rad, Sine only
    std::vector<double> values;  // Values only, one per time

    double evaluate(double t, std::size_t time_index) const;
};

struct SeparableTerm {
    SpatialShape shape;
    TemporalCoefficient coefficient;
};

struct SeparableSpec {
    StructuredGrid grid;
    std::vector<SeparableTerm> terms;
    std::string field = "u";
};

struct SeparableField {
    SnapshotSet set;
    /// Euclidean norm of each term's coefficient series (shapes are unit
    /// norm), i.e. the singular values when the series are orthogonal.
    std::vector<double> sigma;
};

/// Unit-norm lattice shape; throws InvalidArgument when it vanishes.
Eigen::VectorXd spatial_shape_vector(const SpatialShape& shape, const StructuredGrid& grid);

/// Scalar field sum_n alpha_n(t) phi_n(x). Throws InvalidArgument when two
/// shapes are not orthogonal on the lattice.
SeparableField generate_separable_field(const SeparableSpec& spec,
                                        const std::vector<double>& times);

/// u(x) = constant + gradient * x at cell centers.
FieldSnapshot generate_affine_field(const Eigen::Matrix3d& gradient,
                                    const Eigen::Vector3d& constant,
                                    const StructuredGrid& grid, double t = 0.0);

}  // namespace wakefsi
