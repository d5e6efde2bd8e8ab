#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>

#include "doctest.h"
#include "test_util.hpp"
#include "wakefsi/error.hpp"
#include "wakefsi/pod.hpp"
#include "wakefsi/sampling.hpp"
#include "wakefsi/synth.hpp"

using namespace wakefsi;

namespace {

StructuredGrid wake_grid(std::size_t nx = 32, std::size_t ny = 24, std::size_t nz = 24) {
    const double D = 126.0;
    StructuredGrid g;
    g.nx = nx;
    g.ny = ny;
    g.nz = nz;
    // x cell centers sit on multiples of D/8 so the YZ planes need no
    // interpolation across the short tip-vortex wavelength.
    g.dx = 4.0 * D / static_cast<double>(nx);
    g.dy = 2.0 * D / static_cast<double>(ny);
    g.dz = 180.0 / static_cast<double>(nz);
    g.origin = {-0.5 * D - 0.5 * g.dx, -D, 0.0};
    return g;
}

WakeModelParams with_amplitudes(double deficit, double tip, double tower) {
    WakeModelParams p;
    p.deficit_amplitude = deficit;
    p.tip_vortex_amplitude = tip;
    p.tower_wake_amplitude = tower;
    return p;
}

}  // namespace

TEST_CASE("zero amplitudes give uniform free stream") {
    const FieldSnapshot s = generate_wake_snapshot(with_amplitudes(0, 0, 0), wake_grid(8, 6, 6), 1.3);
    for (std::size_t cell = 0; cell < s.grid.cell_count(); ++cell) {
        CHECK(s.data[cell * 3] == 11.4);
        CHECK(s.data[cell * 3 + 1] == 0.0);
        CHECK(s.data[cell * 3 + 2] == 0.0);
    }
}

TEST_CASE("wake generator is deterministic and seed dependent") {
    const StructuredGrid g = wake_grid(8, 6, 6);
    WakeModelParams p;
    const FieldSnapshot a = generate_wake_snapshot(p, g, 0.7), b = generate_wake_snapshot(p, g, 0.7);
    CHECK(std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0);
    p.seed = 2;
    const FieldSnapshot c = generate_wake_snapshot(p, g, 0.7);
    CHECK(a.data != c.data);
}

TEST_CASE("wake generator is a sum of its terms") {
    const StructuredGrid g = wake_grid(10, 8, 8);
    const double t = 2.2;
    const double a = 0.3, b = 1.7, c = 0.9;
    auto field = [&](double x, double y, double z) { return generate_wake_snapshot(with_amplitudes(x, y, z), g, t).data; };
    const auto base = field(0, 0, 0);
    const auto fa = field(a, 0, 0), fb = field(0, b, 0), fab = field(a, b, 0);
    const auto fc = field(0, 0, c), fbc = field(0, b, c);
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(std::abs(fa[i] + fb[i] - base[i] - fab[i]) <= 1e-12);
        CHECK(std::abs(fb[i] + fc[i] - base[i] - fbc[i]) <= 1e-12);
    }
}

TEST_CASE("u stays within the amplitude envelope") {
    WakeModelParams p;
    const StructuredGrid g = wake_grid(16, 12, 12);
    const double lo = p.u_inf * (1.0 - p.deficit_amplitude) - p.tip_vortex_amplitude - p.tower_wake_amplitude;
    const double hi = p.u_inf + p.tip_vortex_amplitude + p.tower_wake_amplitude;
    for (double t : {0.0, 0.9, 3.1}) {
        const FieldSnapshot s = generate_wake_snapshot(p, g, t);
        for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
            CHECK(s.data[cell * 3] >= lo);
            CHECK(s.data[cell * 3] <= hi);
            CHECK(std::abs(s.data[cell * 3 + 1]) <= p.tip_vortex_amplitude + p.tower_wake_amplitude);
            CHECK(std::abs(s.data[cell * 3 + 2]) <= p.tip_vortex_amplitude);
        }
    }
}

TEST_CASE("probe at the tip height peaks at blade-passing frequency") {
    const WakeModelParams p;
    const double D = p.rotor_diameter;
    const std::array<double, 3> probe{0.5 * D, 0.0, p.hub_height + 0.5 * D};
    const std::size_t n = 512;
    const double duration = 60.0;
    std::vector<double> series(n);
    double mean = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        series[s] = wake_velocity(p, probe, duration * static_cast<double>(s) / n)[0];
        mean += series[s] / n;
    }
    // Direct DFT oracle.
    std::size_t peak = 0;
    double best = -1.0;
    for (std::size_t k = 1; k < n / 2; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t s = 0; s < n; ++s)
            acc += (series[s] - mean) *
                   std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * s) / n);
        if (std::abs(acc) > best) {
            best = std::abs(acc);
            peak = k;
        }
    }
    const double f_peak = static_cast<double>(peak) / duration;
    CHECK(std::abs(f_peak - 0.605) <= 0.5 / duration);
    CHECK(p.blade_passing_frequency() == doctest::Approx(0.605));
}

TEST_CASE("wake parameter validation names the field") {
    WakeModelParams p;
    p.tip_vortex_amplitude = -1.0;
    try {
        p.validate();
        FAIL("negative amplitude accepted");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("tip_vortex_amplitude") != std::string::npos);
    }
    p = WakeModelParams{};
    p.rotor_diameter = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    StructuredGrid g = wake_grid(4, 4, 4);
    g.origin[2] = 100.0;
    CHECK_THROWS_AS(generate_wake_snapshot(WakeModelParams{}, g, 0.0), Error);
}

TEST_CASE("YZ plane first-mode energy falls with distance") {
    const WakeModelParams p;
    const StructuredGrid g = wake_grid();
    std::vector<double> times;
    for (int s = 0; s < 64; ++s) times.push_back(0.1 * s);
    const SnapshotSet set = generate_wake_set(p, g, times);
    double prev = 2.0;
    for (double xd : {0.5, 1.0, 1.5, 2.0, 2.5}) {
        const SnapshotSet plane = sample_plane(set, {Axis::X, xd * p.rotor_diameter, ""});
        const PodResult r = pod_method_of_snapshots(assemble_snapshot_matrix(plane, "u", 0, false));
        const double e1 = cumulative_energy(r, 1);
        MESSAGE("x/D = " << xd << " retained(1) = " << e1);
        CHECK(e1 < prev);
        prev = e1;
    }
}

TEST_CASE("separable field examples") {
    StructuredGrid g;
    g.nx = 8;
    g.ny = 4;
    g.nz = 2;
    SeparableSpec spec;
    spec.grid = g;
    SeparableTerm t;
    t.shape.wavenumber = {1, 0, 0};
    spec.terms = {t};
    SeparableField f = generate_separable_field(spec, {0.0, 1.0, 2.0});
    PodResult r = pod_direct_svd(assemble_snapshot_matrix(f.set, "u", 0, false));
    REQUIRE(r.rank() == 1);
    CHECK(std::abs(r.singular_values(0) - std::sqrt(3.0)) <= 1e-12);
    CHECK(f.sigma[0] == doctest::Approx(std::sqrt(3.0)));

    SeparableTerm zero;
    zero.shape.wavenumber = {0, 1, 0};
    zero.coefficient.amplitude = 0.0;
    spec.terms = {t, zero};
    f = generate_separable_field(spec, {0.0, 1.0, 2.0});
    r = pod_method_of_snapshots(assemble_snapshot_matrix(f.set, "u", 0, false));
    CHECK(r.rank() == 1);

    SeparableTerm same = t;
    spec.terms = {t, same};
    CHECK_THROWS_AS(generate_separable_field(spec, {0.0}), Error);

    SeparableTerm vanishing;
    vanishing.shape.wavenumber = {0, 0, 0};
    vanishing.shape.kind = {Trig::Sin, Trig::Cos, Trig::Cos};
    spec.terms = {vanishing};
    CHECK_THROWS_AS(generate_separable_field(spec, {0.0}), Error);
}

TEST_CASE("separable snapshots equal the sum of their terms") {
    StructuredGrid g;
    g.nx = 12;
    g.ny = 6;
    g.nz = 4;
    SeparableSpec spec;
    spec.grid = g;
    SeparableTerm a, b;
    a.shape.wavenumber = {2, 1, 0};
    a.coefficient.kind = TemporalKind::Sine;
    a.coefficient.amplitude = 2.0;
    a.coefficient.frequency = 0.3;
    b.shape.wavenumber = {1, 0, 1};
    b.shape.kind = {Trig::Sin, Trig::Cos, Trig::Cos};
    b.coefficient.amplitude = 0.5;
    spec.terms = {a, b};
    const std::vector<double> times{0.0, 0.4, 1.1};
    const SeparableField f = generate_separable_field(spec, times);
    const Eigen::VectorXd sa = spatial_shape_vector(a.shape, g), sb = spatial_shape_vector(b.shape, g);
    CHECK(std::abs(sa.norm() - 1.0) <= 1e-14);
    for (std::size_t s = 0; s < times.size(); ++s) {
        const Eigen::VectorXd expect = a.coefficient.evaluate(times[s], s) * sa + 0.5 * sb;
        for (Eigen::Index i = 0; i < expect.size(); ++i)
            CHECK(std::abs(f.set.snapshots[0][s].data[static_cast<std::size_t>(i)] - expect(i)) <= 1e-15);
    }
}

TEST_CASE("affine generator") {
    StructuredGrid g;
    g.nx = 3;
    g.ny = 2;
    g.nz = 2;
    const FieldSnapshot s = generate_affine_field(Eigen::Matrix3d::Zero(), {1, 0, 0}, g);
    for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
        CHECK(s.data[cell * 3] == 1.0);
        CHECK(s.data[cell * 3 + 1] == 0.0);
    }
}
