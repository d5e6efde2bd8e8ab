#include <cmath>
#include <cstring>
#include <fstream>

#include "doctest.h"
#include "test_util.hpp"
#include "wakefsi/derived.hpp"
#include "wakefsi/error.hpp"
#include "wakefsi/field_io.hpp"
#include "wakefsi/sampling.hpp"
#include "wakefsi/synth.hpp"

using namespace wakefsi;

namespace {

StructuredGrid cube(std::size_t n, double h = 1.0) {
    StructuredGrid g;
    g.nx = g.ny = g.nz = n;
    g.dx = g.dy = g.dz = h;
    return g;
}

FieldSnapshot scalar_field(const StructuredGrid& g, double (*f)(double, double, double)) {
    FieldSnapshot s(g, 1, 0.0);
    for (std::size_t k = 0; k < g.nz; ++k)
        for (std::size_t j = 0; j < g.ny; ++j)
            for (std::size_t i = 0; i < g.nx; ++i) {
                const auto c = g.cell_center(i, j, k);
                s.at(i, j, k, 0) = f(c[0], c[1], c[2]);
            }
    return s;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Numerical;
}

}  // namespace

TEST_CASE("grid cell centers and validation") {
    StructuredGrid g;
    g.nx = 4;
    g.ny = 2;
    g.nz = 3;
    g.dx = 2.0;
    g.origin = {1.0, -1.0, 0.5};
    const auto c = g.cell_center(1, 1, 2);
    CHECK(c[0] == 1.0 + 1.5 * 2.0);
    CHECK(c[1] == -1.0 + 1.5);
    CHECK(c[2] == 0.5 + 2.5);
    CHECK(g.cell_index(3, 1, 2) == (2 * 2 + 1) * 4 + 3);

    StructuredGrid bad = g;
    bad.nx = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = g;
    bad.dz = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("snapshot set round trip preserves a 2x2x2 snapshot exactly") {
    SnapshotSet set;
    set.grid = cube(2);
    set.times = {0.0};
    FieldSnapshot s(set.grid, 1, 0.0);
    for (std::size_t i = 0; i < 8; ++i) s.data[i] = 0.1 * static_cast<double>(i) - 1.0 / 3.0;
    set.add_field("u", {s});
    const auto dir = testutil::fresh_dir("rt_small");
    save_snapshot_set(set, dir);
    const SnapshotSet back = load_snapshot_set(dir);
    REQUIRE(back.snapshot_count() == 1);
    CHECK(back.grid == set.grid);
    CHECK(std::memcmp(back.snapshots[0][0].data.data(), s.data.data(), 8 * sizeof(double)) == 0);
}

TEST_CASE("short data file is reported as a size mismatch") {
    SnapshotSet set;
    set.grid = cube(2);
    set.times = {0.0};
    set.add_field("u", {FieldSnapshot(set.grid, 1, 0.0)});
    const auto dir = testutil::fresh_dir("rt_short");
    save_snapshot_set(set, dir);
    write_f64_file(dir / expand_pattern(set.pattern, 0, "u"), std::vector<double>(7, 1.0));
    try {
        load_snapshot_set(dir);
        FAIL("load should fail");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SizeMismatch);
        CHECK(std::string(e.what()).find("size mismatch") != std::string::npos);
    }
}

TEST_CASE("load rejects a missing manifest, non-finite values and non-monotone times") {
    CHECK(code_of([] { load_snapshot_set(testutil::fresh_dir("rt_empty")); }) == ErrorCode::Io);

    SnapshotSet set;
    set.grid = cube(2);
    set.times = {0.0, 1.0};
    set.add_field("u", {FieldSnapshot(set.grid, 1, 0.0), FieldSnapshot(set.grid, 1, 1.0)});
    const auto dir = testutil::fresh_dir("rt_nan");
    save_snapshot_set(set, dir);
    std::vector<double> nan_data(8, 0.0);
    nan_data[3] = std::nan("");
    write_f64_file(dir / expand_pattern(set.pattern, 1, "u"), nan_data);
    CHECK(code_of([&] { load_snapshot_set(dir); }) == ErrorCode::NonFinite);

    const auto dir2 = testutil::fresh_dir("rt_times");
    save_snapshot_set(set, dir2);
    std::ifstream in(dir2 / "manifest.json");
    std::string text((std::istreambuf_iterator<char>(in)), {});
    in.close();
    const auto times_at = text.find("\"times\"");
    REQUIRE(times_at != std::string::npos);
    const auto open = text.find('[', times_at), close = text.find(']', times_at);
    text.replace(open, close - open + 1, "[1.0, 0.0]");
    std::ofstream(dir2 / "manifest.json") << text;
    CHECK(code_of([&] { load_snapshot_set(dir2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("synthetic 16x8x8 set with 10 snapshots round trips bitwise") {
    StructuredGrid g;
    g.nx = 16;
    g.ny = 8;
    g.nz = 8;
    g.dx = 20.0;
    g.dy = g.dz = 25.0;
    g.origin = {-40.0, -100.0, 0.0};
    std::vector<double> times;
    for (int s = 0; s < 10; ++s) times.push_back(0.1 * s);
    const SnapshotSet set = generate_wake_set(WakeModelParams{}, g, times);
    const auto dir = testutil::fresh_dir("rt_wake");
    save_snapshot_set(set, dir);
    const SnapshotSet back = load_snapshot_set(dir);
    REQUIRE(back.snapshot_count() == 10);
    CHECK(back.times == set.times);
    for (std::size_t s = 0; s < 10; ++s) {
        const auto& a = set.snapshots[0][s].data;
        const auto& b = back.snapshots[0][s].data;
        REQUIRE(a.size() == b.size());
        CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("multi-field sets need a field placeholder and round trip") {
    SnapshotSet set;
    set.grid = cube(2);
    set.times = {0.0};
    set.pattern = "{field}_{index}.bin";
    FieldSnapshot a(set.grid, 1, 0.0), b(set.grid, 3, 0.0);
    std::fill(a.data.begin(), a.data.end(), 2.0);
    std::fill(b.data.begin(), b.data.end(), -1.5);
    set.add_field("p", {a});
    set.add_field("u", {b});
    const auto dir = testutil::fresh_dir("rt_multi");
    save_snapshot_set(set, dir);
    const SnapshotSet back = load_snapshot_set(dir);
    CHECK(back.fields == set.fields);
    CHECK(back.snapshots[1][0].data == b.data);

    set.pattern = "snap_{index}.bin";
    CHECK_THROWS_AS(set.validate(), Error);
    CHECK(expand_pattern("{field}_{index}.bin", 12, "u") == "u_12.bin");
}

TEST_CASE("plane sampling of a constant field returns the constant") {
    StructuredGrid g = cube(5, 0.7);
    FieldSnapshot s(g, 3, 0.0);
    for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] = i % 3 == 0 ? 4.25 : -1.0;
    for (Axis a : {Axis::X, Axis::Y, Axis::Z})
        for (double off : {0.0, 0.33, 1.75, 3.5}) {
            const FieldSnapshot p = sample_plane(s, {a, off, ""});
            CHECK(p.grid.count(a) == 1);
            for (std::size_t i = 0; i < p.data.size(); ++i) CHECK(p.data[i] == (i % 3 == 0 ? 4.25 : -1.0));
        }
}

TEST_CASE("plane on a cell-center layer returns stored values exactly") {
    StructuredGrid g = cube(6, 0.5);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    FieldSnapshot s(g, 1, 0.0);
    for (double& v : s.data) v = u(rng);
    const double z = g.cell_center(0, 0, 3)[2];
    const FieldSnapshot p = sample_plane(s, {Axis::Z, z, ""});
    for (std::size_t j = 0; j < 6; ++j)
        for (std::size_t i = 0; i < 6; ++i) CHECK(p.at(i, j, 0, 0) == s.at(i, j, 3, 0));
}

TEST_CASE("plane sampling is exact for affine fields") {
    const StructuredGrid g = cube(16, 1.0 / 16.0);
    const FieldSnapshot s = scalar_field(g, [](double x, double y, double z) { return x + 2 * y + 3 * z; });
    const double zp = 0.5 + 0.013;
    const FieldSnapshot p = sample_plane(s, {Axis::Z, zp, ""});
    double worst = 0.0;
    for (std::size_t j = 0; j < 16; ++j)
        for (std::size_t i = 0; i < 16; ++i) {
            const auto c = g.cell_center(i, j, 0);
            worst = std::max(worst, std::abs(p.at(i, j, 0, 0) - (c[0] + 2 * c[1] + 3 * zp)));
        }
    CHECK(worst <= 1e-12);
    CHECK_THROWS_AS(sample_plane(s, {Axis::X, 1.5, ""}), Error);
    CHECK_THROWS_AS(sample_plane(s, {Axis::Y, -0.01, ""}), Error);
}

TEST_CASE("plane sampling is linear in the field") {
    const StructuredGrid g = cube(7, 0.3);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    FieldSnapshot f(g, 1, 0.0), h(g, 1, 0.0), mix(g, 1, 0.0);
    const double a = 1.7, b = -0.4;
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        f.data[i] = u(rng);
        h.data[i] = u(rng);
        mix.data[i] = a * f.data[i] + b * h.data[i];
    }
    for (int trial = 0; trial < 20; ++trial) {
        const PlaneSpec plane{static_cast<Axis>(trial % 3), 2.1 * u(rng) * 0.5 + 1.05, ""};
        const FieldSnapshot pf = sample_plane(f, plane), ph = sample_plane(h, plane),
                            pm = sample_plane(mix, plane);
        for (std::size_t i = 0; i < pm.data.size(); ++i) {
            const double expect = a * pf.data[i] + b * ph.data[i];
            CHECK(std::abs(pm.data[i] - expect) <= 1e-13 * std::max(1.0, std::abs(expect)));
        }
    }
}

TEST_CASE("default wake planes") {
    const auto planes = default_wake_planes(126.0, 90.0);
    REQUIRE(planes.size() == 10);
    for (int i = 0; i < 5; ++i) {
        CHECK(planes[i].axis == Axis::X);
        CHECK(planes[i].offset == doctest::Approx(126.0 * 0.5 * (i + 1)));
    }
    CHECK(planes[5].axis == Axis::Z);
    CHECK(planes[5].offset == 90.0);
    CHECK(planes[6].offset == 90.0 + 63.0);
    CHECK(planes[7].offset == 90.0 - 63.0);
    CHECK(planes[8].axis == Axis::Y);
    CHECK(planes[8].offset == 0.0);
    CHECK(planes[9].offset == 63.0);
}

TEST_CASE("gradient of affine fields is exact") {
    StructuredGrid g;
    g.nx = 5;
    g.ny = 4;
    g.nz = 3;
    g.dx = 0.5;
    g.dy = 0.25;
    g.dz = 2.0;
    g.origin = {-1.0, 3.0, 0.0};

    SUBCASE("uniform flow") {
        const FieldSnapshot grad = compute_gradient(generate_affine_field(Eigen::Matrix3d::Zero(), {11.4, 0, 0}, g));
        for (double v : grad.data) CHECK(v == 0.0);
    }
    SUBCASE("shear") {
        Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
        G(0, 1) = 1.0;
        const FieldSnapshot grad = compute_gradient(generate_affine_field(G, Eigen::Vector3d::Zero(), g));
        for (std::size_t cell = 0; cell < g.cell_count(); ++cell)
            for (int c = 0; c < 9; ++c)
                CHECK(std::abs(grad.data[cell * 9 + c] - (c == 1 ? 1.0 : 0.0)) <= 1e-12);
    }
    SUBCASE("random affine fields to 1e-12") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::Matrix3d G = testutil::random_matrix(rng, 3, 3);
            const Eigen::Vector3d c = testutil::random_matrix(rng, 3, 1);
            const FieldSnapshot grad = compute_gradient(generate_affine_field(G, c, g));
            for (std::size_t cell = 0; cell < g.cell_count(); ++cell)
                for (int r = 0; r < 3; ++r)
                    for (int q = 0; q < 3; ++q)
                        CHECK(std::abs(grad.data[cell * 9 + 3 * r + q] - G(r, q)) <= 1e-12);
        }
    }
}

TEST_CASE("gradient rejects scalar input and degenerate axes") {
    StructuredGrid g = cube(3);
    CHECK_THROWS_AS(compute_gradient(FieldSnapshot(g, 1, 0.0)), Error);
    g.nz = 1;
    CHECK_THROWS_AS(compute_gradient(FieldSnapshot(g, 3, 0.0)), Error);
    g.nz = 2;
    CHECK_NOTHROW(compute_gradient(FieldSnapshot(g, 3, 0.0)));
}

namespace {

double interior_sin_error(std::size_t n) {
    StructuredGrid g;
    g.nx = n;
    g.ny = 3;
    g.nz = 3;
    g.dx = 2.0 / static_cast<double>(n);
    FieldSnapshot u(g, 3, 0.0);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t i = 0; i < n; ++i) u.at(i, j, k, 0) = std::sin(g.cell_center(i, j, k)[0]);
    const FieldSnapshot grad = compute_gradient(u);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i)
        worst = std::max(worst, std::abs(grad.at(i, 1, 1, 0) - std::cos(g.cell_center(i, 1, 1)[0])));
    return worst;
}

}  // namespace

TEST_CASE("gradient of sin x converges at second order") {
    const double e1 = interior_sin_error(16), e2 = interior_sin_error(32), e3 = interior_sin_error(64);
    CHECK(std::log2(e1 / e2) >= 1.9);
    CHECK(std::log2(e2 / e3) >= 1.9);
}

TEST_CASE("strain rate, rotation rate and Q for canonical flows") {
    const StructuredGrid g = cube(4, 0.5);
    auto tensors = [&](const Eigen::Matrix3d& G) {
        const FieldSnapshot grad = compute_gradient(generate_affine_field(G, Eigen::Vector3d::Zero(), g));
        return std::tuple{compute_strain_rate(grad), compute_rotation_rate(grad), compute_q_criterion(grad)};
    };
    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };

    Eigen::Matrix3d rot = Eigen::Matrix3d::Zero();
    rot(0, 1) = -1.0;
    rot(1, 0) = 1.0;
    {
        const auto [S, W, Q] = tensors(rot);
        for (double v : S.data) CHECK(near(v, 0.0));
        for (double v : Q.data) CHECK(near(v, 1.0));
        for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
            CHECK(near(W.data[cell * 9 + 1], -1.0));
            CHECK(near(W.data[cell * 9 + 3], 1.0));
        }
    }
    Eigen::Matrix3d ext = Eigen::Matrix3d::Zero();
    ext(0, 0) = 1.0;
    ext(1, 1) = -1.0;
    {
        const auto [S, W, Q] = tensors(ext);
        for (std::size_t cell = 0; cell < g.cell_count(); ++cell)
            for (int c = 0; c < 9; ++c)
                CHECK(near(S.data[cell * 9 + c], c == 0 ? 1.0 : (c == 4 ? -1.0 : 0.0)));
    }
    Eigen::Matrix3d shear = Eigen::Matrix3d::Zero();
    shear(0, 1) = 1.0;
    {
        const auto [S, W, Q] = tensors(shear);
        for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
            for (int c = 0; c < 9; ++c) CHECK(S.data[cell * 9 + c] == (c == 1 || c == 3 ? 0.5 : 0.0));
            CHECK(Q.data[cell] == 0.0);
        }
    }
    {
        const auto [S, W, Q] = tensors(Eigen::Matrix3d::Zero());
        for (double v : Q.data) CHECK(v == 0.0);
    }
}

TEST_CASE("strain is exactly symmetric and rotation exactly antisymmetric") {
    const StructuredGrid g = cube(5, 0.2);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    FieldSnapshot vel(g, 3, 0.0);
    for (double& v : vel.data) v = u(rng);
    const FieldSnapshot grad = compute_gradient(vel);
    const FieldSnapshot S = compute_strain_rate(grad), W = compute_rotation_rate(grad);
    for (std::size_t cell = 0; cell < g.cell_count(); ++cell)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                CHECK(S.data[cell * 9 + 3 * r + c] == S.data[cell * 9 + 3 * c + r]);
                CHECK(W.data[cell * 9 + 3 * r + c] == -W.data[cell * 9 + 3 * c + r]);
            }
    CHECK_THROWS_AS(compute_strain_rate(vel), Error);
}

TEST_CASE("pure shear is exact on arbitrary spacings and origins") {
    StructuredGrid g;
    g.nx = 5;
    g.ny = 7;
    g.nz = 3;
    g.dx = 0.3;
    g.dy = 0.1;
    g.dz = 1.7;
    g.origin = {-0.9, 12.345, -3.3};
    Eigen::Matrix3d shear = Eigen::Matrix3d::Zero();
    shear(0, 1) = 1.0;
    const FieldSnapshot grad = compute_gradient(generate_affine_field(shear, Eigen::Vector3d::Zero(), g));
    const FieldSnapshot s = compute_strain_rate(grad);
    const FieldSnapshot q = compute_q_criterion(grad);
    for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
        for (int c = 0; c < 9; ++c) CHECK(s.data[cell * 9 + c] == (c == 1 || c == 3 ? 0.5 : 0.0));
        CHECK(q.data[cell] == 0.0);
    }
}
