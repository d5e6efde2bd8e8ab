#include "wakefsi/sampling.hpp"

#include <cmath>
#include <string>

#include "wakefsi/error.hpp"

namespace wakefsi {

namespace {

// Fractional offsets within this distance of a cell-center layer snap onto it.
constexpr double kLayerSnap = 1e-9;

struct Bracket {
    std::size_t lo = 0;
    std::size_t hi = 0;
    double w = 0.0;  // weight of hi
};

Bracket bracket_fraction(double f, std::size_t n) {
    const double nearest = std::round(f);
    if (std::abs(f - nearest) <= kLayerSnap) f = nearest;
    if (f <= 0.0) return {0, 0, 0.0};
    const double last = static_cast<double>(n - 1);
    if (f >= last) return {n - 1, n - 1, 0.0};
    const double lo = std::floor(f);
    const auto i = static_cast<std::size_t>(lo);
    return {i, i + 1, f - lo};
}

Bracket bracket_coordinate(const StructuredGrid& g, Axis a, double x) {
    const double f = (x - g.lower(a)) / g.spacing(a) - 0.5;
    return bracket_fraction(f, g.count(a));
}

Bracket exact_index(std::size_t i) { return {i, i, 0.0}; }

double blend(const FieldSnapshot& snap, const Bracket& bx, const Bracket& by, const Bracket& bz,
             std::size_t c) {
    const std::size_t is[2] = {bx.lo, bx.hi};
    const std::size_t js[2] = {by.lo, by.hi};
    const std::size_t ks[2] = {bz.lo, bz.hi};
    const double wx[2] = {1.0 - bx.w, bx.w};
    const double wy[2] = {1.0 - by.w, by.w};
    const double wz[2] = {1.0 - bz.w, bz.w};
    double v = 0.0;
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) {
                const double w = wx[i] * wy[j] * wz[k];
                if (w != 0.0) v += w * snap.at(is[i], js[j], ks[k], c);
            }
    return v;
}

void check_inside(const StructuredGrid& g, Axis a, double x) {
    if (!(x >= g.lower(a) && x <= g.upper(a)))
        fail(ErrorCode::OutOfRange, "offset " + std::to_string(x) + " outside grid bounds along " +
                                        axis_name(a) + " [" + std::to_string(g.lower(a)) + ", " +
                                        std::to_string(g.upper(a)) + "]");
}

}  // namespace

double interpolate(const FieldSnapshot& snap, const std::array<double, 3>& point,
                   std::size_t component) {
    require(component < snap.components, ErrorCode::OutOfRange, "interpolate: component out of range");
    for (int a = 0; a < 3; ++a) check_inside(snap.grid, static_cast<Axis>(a), point[a]);
    return blend(snap, bracket_coordinate(snap.grid, Axis::X, point[0]),
                 bracket_coordinate(snap.grid, Axis::Y, point[1]),
                 bracket_coordinate(snap.grid, Axis::Z, point[2]), component);
}

FieldSnapshot sample_plane(const FieldSnapshot& snap, const PlaneSpec& plane) {
    const StructuredGrid& g = snap.grid;
    check_inside(g, plane.axis, plane.offset);

    StructuredGrid out_grid = g;
    const int a = static_cast<int>(plane.axis);
    const double d = g.spacing(plane.axis);
    switch (plane.axis) {
    case Axis::X: out_grid.nx = 1; break;
    case Axis::Y: out_grid.ny = 1; break;
    case Axis::Z: out_grid.nz = 1; break;
    }
    out_grid.origin[a] = plane.offset - 0.5 * d;

    const Bracket normal = bracket_coordinate(g, plane.axis, plane.offset);
    FieldSnapshot out(out_grid, snap.components, snap.time);
    for (std::size_t k = 0; k < out_grid.nz; ++k)
        for (std::size_t j = 0; j < out_grid.ny; ++j)
            for (std::size_t i = 0; i < out_grid.nx; ++i) {
                const Bracket bx = plane.axis == Axis::X ? normal : exact_index(i);
                const Bracket by = plane.axis == Axis::Y ? normal : exact_index(j);
                const Bracket bz = plane.axis == Axis::Z ? normal : exact_index(k);
                for (std::size_t c = 0; c < snap.components; ++c)
                    out.at(i, j, k, c) = blend(snap, bx, by, bz, c);
            }
    return out;
}

SnapshotSet sample_plane(const SnapshotSet& set, const PlaneSpec& plane) {
    check_inside(set.grid, plane.axis, plane.offset);
    SnapshotSet out;
    out.times = set.times;
    out.pattern = set.pattern;
    out.fields = set.fields;
    for (const auto& series : set.snapshots) {
        std::vector<FieldSnapshot> sampled;
        sampled.reserve(series.size());
        for (const auto& snap : series) sampled.push_back(sample_plane(snap, plane));
        out.snapshots.push_back(std::move(sampled));
    }
    if (!out.snapshots.empty() && !out.snapshots.front().empty()) {
        out.grid = out.snapshots.front().front().grid;
    } else {
        out.grid = sample_plane(FieldSnapshot(set.grid, 1, 0.0), plane).grid;
    }
    return out;
}

}  // namespace wakefsi
