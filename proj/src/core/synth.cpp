#include "wakefsi/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "wakefsi/error.hpp"

namespace wakefsi {

namespace {

constexpr double kPi = std::numbers::pi;

void check_param(bool ok, const char* name, const char* rule) {
    require(ok, ErrorCode::InvalidArgument, std::string(name) + " " + rule);
}

// Uniform phase in [0, 2pi) from the top 53 bits, independent of the
// standard library's distribution implementation.
double draw_phase(std::mt19937_64& rng) {
    return 2.0 * kPi * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct WakePhases {
    double tip;
    double tower;
};

WakePhases phases_for(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double tip = draw_phase(rng);
    const double tower = draw_phase(rng);
    return {tip, tower};
}

}  // namespace

void WakeModelParams::validate() const {
    check_param(std::isfinite(u_inf) && u_inf > 0.0, "u_inf", "must be > 0");
    check_param(std::isfinite(rotor_rpm) && rotor_rpm >= 0.0, "rotor_rpm", "must be >= 0");
    check_param(std::isfinite(rotor_diameter) && rotor_diameter > 0.0, "rotor_diameter", "must be > 0");
    check_param(std::isfinite(hub_height) && hub_height > 0.0, "hub_height", "must be > 0");
    check_param(std::isfinite(rotor_x), "rotor_x", "must be finite");
    check_param(blades >= 1, "blades", "must be >= 1");
    check_param(std::isfinite(deficit_amplitude) && deficit_amplitude >= 0.0 && deficit_amplitude <= 1.0,
                "deficit_amplitude", "must lie in [0, 1]");
    check_param(std::isfinite(deficit_growth) && deficit_growth >= 0.0, "deficit_growth", "must be >= 0");
    check_param(std::isfinite(tip_vortex_amplitude) && tip_vortex_amplitude >= 0.0,
                "tip_vortex_amplitude", "must be >= 0");
    check_param(std::isfinite(tip_decay_length) && tip_decay_length > 0.0, "tip_decay_length",
                "must be > 0");
    check_param(std::isfinite(tower_wake_amplitude) && tower_wake_amplitude >= 0.0,
                "tower_wake_amplitude", "must be >= 0");
    check_param(std::isfinite(tower_strouhal) && tower_strouhal > 0.0, "tower_strouhal", "must be > 0");
    check_param(std::isfinite(tower_diameter) && tower_diameter > 0.0, "tower_diameter", "must be > 0");
}

double WakeModelParams::rotor_omega() const { return 2.0 * kPi * rotor_rpm / 60.0; }

double WakeModelParams::blade_passing_frequency() const { return blades * rotor_rpm / 60.0; }

double WakeModelParams::tower_shedding_frequency() const {
    return tower_strouhal * u_inf / tower_diameter;
}

namespace {

std::array<double, 3> wake_velocity_at(const WakeModelParams& p, const WakePhases& ph,
                                       const std::array<double, 3>& pos, double t) {
    const double radius = 0.5 * p.rotor_diameter;
    const double xr = pos[0] - p.rotor_x;
    const double xd = std::max(xr, 0.0);
    const double y = pos[1];
    const double zr = pos[2] - p.hub_height;
    const double r = std::hypot(y, zr);
    const double theta = std::atan2(zr, y);
    // Smooth onset across the rotor plane.
    const double onset = 0.5 * (1.0 + std::tanh(xr / (0.05 * p.rotor_diameter)));

    // Axial deficit: Gaussian whose width grows linearly, peak falls so the
    // integrated deficit is conserved.
    const double width0 = 0.5 * radius;
    const double width = width0 + p.deficit_growth * xd;
    const double spread = (width0 / width) * (width0 / width);
    const double deficit =
        p.deficit_amplitude * onset * spread * std::exp(-r * r / (2.0 * width * width));

    // Helical tip-vortex ring at blade-passing frequency, convected at u_inf.
    const double ring_radius = radius + p.deficit_growth * xd;
    const double core = 0.06 * p.rotor_diameter + 0.5 * p.deficit_growth * xd;
    const double ring = std::exp(-(r - ring_radius) * (r - ring_radius) / (2.0 * core * core));
    const double blade_omega = p.blades * p.rotor_omega();
    const double tip_phase = p.blades * (p.rotor_omega() * t - theta) -
                             blade_omega * xd / p.u_inf + ph.tip;
    const double tip = p.tip_vortex_amplitude * onset * std::exp(-xd / p.tip_decay_length) * ring *
                       std::cos(tip_phase);

    // Tower wake: a strip below the hub meandering laterally at the shedding
    // frequency; it strengthens and widens downstream.
    const double growth = 1.0 - std::exp(-xd / (1.5 * p.rotor_diameter));
    const double strip_top = p.hub_height - 0.1 * p.rotor_diameter;
    const double below = 0.5 * (1.0 - std::tanh((pos[2] - strip_top) / (0.03 * p.rotor_diameter)));
    const double strip_width = p.tower_diameter * (1.0 + 4.0 * xd / p.rotor_diameter);
    const double shed_phase =
        2.0 * kPi * p.tower_shedding_frequency() * (t - xd / p.u_inf) + ph.tower;
    const double sway = 0.5 * strip_width * std::sin(shed_phase);
    const double strip =
        std::exp(-(y - sway) * (y - sway) / (2.0 * strip_width * strip_width)) * below * growth;
    const double tower = p.tower_wake_amplitude * strip;

    const double u = p.u_inf * (1.0 - deficit) + tip - tower;
    const double v = -0.5 * tip * std::sin(theta) + 0.5 * tower * std::cos(shed_phase);
    const double w = 0.5 * tip * std::cos(theta);
    return {u, v, w};
}

}  // namespace

std::array<double, 3> wake_velocity(const WakeModelParams& p, const std::array<double, 3>& pos,
                                    double t) {
    return wake_velocity_at(p, phases_for(p.seed), pos, t);
}

FieldSnapshot generate_wake_snapshot(const WakeModelParams& p, const StructuredGrid& grid, double t) {
    p.validate();
    grid.validate();
    require(grid.lower(Axis::Z) <= p.hub_height && p.hub_height <= grid.upper(Axis::Z) &&
                grid.lower(Axis::Y) <= 0.0 && 0.0 <= grid.upper(Axis::Y) &&
                grid.upper(Axis::X) > p.rotor_x,
            ErrorCode::InvalidArgument,
            "grid does not contain the rotor disc center and the wake region behind it");

    const WakePhases ph = phases_for(p.seed);
    FieldSnapshot snap(grid, 3, t);
    for (std::size_t k = 0; k < grid.nz; ++k)
        for (std::size_t j = 0; j < grid.ny; ++j)
            for (std::size_t i = 0; i < grid.nx; ++i) {
                const auto vel = wake_velocity_at(p, ph, grid.cell_center(i, j, k), t);
                for (std::size_t c = 0; c < 3; ++c) snap.at(i, j, k, c) = vel[c];
            }
    return snap;
}

SnapshotSet generate_wake_set(const WakeModelParams& p, const StructuredGrid& grid,
                              const std::vector<double>& times) {
    require(!times.empty(), ErrorCode::InvalidArgument, "wake set: times must be nonempty");
    SnapshotSet set;
    set.grid = grid;
    set.times = times;
    set.pattern = "u_{index}.bin";
    std::vector<FieldSnapshot> snaps;
    snaps.reserve(times.size());
    for (double t : times) snaps.push_back(generate_wake_snapshot(p, grid, t));
    set.add_field("u", std::move(snaps));
    set.validate();
    return set;
}

double TemporalCoefficient::evaluate(double t, std::size_t time_index) const {
    switch (kind) {
    case TemporalKind::Constant: return amplitude;
    case TemporalKind::Sine: return amplitude * std::sin(2.0 * kPi * frequency * t + phase);
    case TemporalKind::Values: return values.at(time_index);
    }
    return 0.0;
}

Eigen::VectorXd spatial_shape_vector(const SpatialShape& shape, const StructuredGrid& grid) {
    const std::array<std::size_t, 3> n{grid.nx, grid.ny, grid.nz};
    std::array<std::vector<double>, 3> factors;
    for (int a = 0; a < 3; ++a) {
        require(shape.wavenumber[a] >= 0, ErrorCode::InvalidArgument,
                "separable shape: wavenumbers must be >= 0");
        factors[a].resize(n[a]);
        for (std::size_t i = 0; i < n[a]; ++i) {
            const double arg = 2.0 * kPi * shape.wavenumber[a] * static_cast<double>(i) /
                               static_cast<double>(n[a]);
            factors[a][i] = shape.kind[a] == Trig::Cos ? std::cos(arg) : std::sin(arg);
        }
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid.cell_count()));
    for (std::size_t k = 0; k < n[2]; ++k)
        for (std::size_t j = 0; j < n[1]; ++j)
            for (std::size_t i = 0; i < n[0]; ++i)
                v(static_cast<Eigen::Index>(grid.cell_index(i, j, k))) =
                    factors[0][i] * factors[1][j] * factors[2][k];
    const double norm = v.norm();
    require(norm > 1e-8, ErrorCode::InvalidArgument,
            "separable shape vanishes on the grid lattice");
    return v / norm;
}

SeparableField generate_separable_field(const SeparableSpec& spec, const std::vector<double>& times) {
    spec.grid.validate();
    require(!spec.terms.empty(), ErrorCode::InvalidArgument, "separable field: at least one term");
    require(!times.empty(), ErrorCode::InvalidArgument, "separable field: times must be nonempty");

    std::vector<Eigen::VectorXd> shapes;
    for (const auto& term : spec.terms) {
        shapes.push_back(spatial_shape_vector(term.shape, spec.grid));
        if (term.coefficient.kind == TemporalKind::Values)
            require(term.coefficient.values.size() == times.size(), ErrorCode::InvalidArgument,
                    "separable field: coefficient values must match the time count");
    }
    for (std::size_t a = 0; a < shapes.size(); ++a)
        for (std::size_t b = a + 1; b < shapes.size(); ++b)
            require(std::abs(shapes[a].dot(shapes[b])) <= 1e-10, ErrorCode::InvalidArgument,
                    "separable field: shapes " + std::to_string(a) + " and " + std::to_string(b) +
                        " are not orthogonal on the grid");

    SeparableField out;
    out.set.grid = spec.grid;
    out.set.times = times;
    out.set.pattern = spec.field + "_{index}.bin";
    std::vector<FieldSnapshot> snaps;
    std::vector<double> sq(spec.terms.size(), 0.0);
    for (std::size_t s = 0; s < times.size(); ++s) {
        FieldSnapshot snap(spec.grid, 1, times[s]);
        Eigen::Map<Eigen::VectorXd> values(snap.data.data(), static_cast<Eigen::Index>(snap.data.size()));
        for (std::size_t n = 0; n < spec.terms.size(); ++n) {
            const double alpha = spec.terms[n].coefficient.evaluate(times[s], s);
            values += alpha * shapes[n];
            sq[n] += alpha * alpha;
        }
        snaps.push_back(std::move(snap));
    }
    out.set.add_field(spec.field, std::move(snaps));
    out.set.validate();
    for (double e : sq) out.sigma.push_back(std::sqrt(e));
    return out;
}

FieldSnapshot generate_affine_field(const Eigen::Matrix3d& gradient, const Eigen::Vector3d& constant,
                                    const StructuredGrid& grid, double t) {
    grid.validate();
    FieldSnapshot snap(grid, 3, t);
    for (std::size_t k = 0; k < grid.nz; ++k)
        for (std::size_t j = 0; j < grid.ny; ++j)
            for (std::size_t i = 0; i < grid.nx; ++i) {
                const auto c = grid.cell_center(i, j, k);
                const Eigen::Vector3d u = constant + gradient * Eigen::Vector3d(c[0], c[1], c[2]);
                for (int comp = 0; comp < 3; ++comp) snap.at(i, j, k, comp) = u(comp);
            }
    return snap;
}

}  // namespace wakefsi
