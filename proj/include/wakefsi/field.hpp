#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace wakefsi {

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Axis-aligned uniform grid. Data lives at cell centers.
struct StructuredGrid {
    std::size_t nx = 1, ny = 1, nz = 1;
    double dx = 1.0, dy = 1.0, dz = 1.0;
    std::array<double, 3> origin{0.0, 0.0, 0.0};

    /// Throws InvalidArgument unless all counts >= 1 and spacings > 0.
    void validate() const;

    std::size_t cell_count() const { return nx * ny * nz; }
    std::size_t count(Axis a) const;
    double spacing(Axis a) const;

    /// Lower and upper face of the bounding box along an axis.
    double lower(Axis a) const { return origin[static_cast<int>(a)]; }
    double upper(Axis a) const { return lower(a) + static_cast<double>(count(a)) * spacing(a); }

    std::array<double, 3> cell_center(std::size_t i, std::size_t j, std::size_t k) const;

    /// Row-major with i fastest.
    std::size_t cell_index(std::size_t i, std::size_t j, std::size_t k) const {
        return (k * ny + j) * nx + i;
    }

    bool operator==(const StructuredGrid&) const = default;
};

/// A time-stamped field on a grid. Layout: ((k*ny + j)*nx + i)*components + c.
struct FieldSnapshot {
    StructuredGrid grid;
    std::size_t components = 1;
    double time = 0.0;
    std::vector<double> data;

    FieldSnapshot() = default;
    FieldSnapshot(const StructuredGrid& g, std::size_t comps, double t);

    /// Length and finiteness checks.
    void validate() const;

    double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t c) {
        return data[grid.cell_index(i, j, k) * components + c];
    }
    double at(std::size_t i, std::size_t j, std::size_t k, std::size_t c) const {
        return data[grid.cell_index(i, j, k) * components + c];
    }
};

struct PlaneSpec {
    Axis axis = Axis::X;
    double offset = 0.0;
    std::string label;
};

struct FieldInfo {
    std::string name;
    std::size_t components = 1;

    bool operator==(const FieldInfo&) const = default;
};

/// Ordered snapshots of one or more fields sharing a grid.
///
/// `snapshots[f][s]` is field `f` at time `times[s]`.
struct SnapshotSet {
    StructuredGrid grid;
    std::vector<FieldInfo> fields;
    std::vector<double> times;
    std::string pattern = "snapshot_{index}.bin";
    std::vector<std::vector<FieldSnapshot>> snapshots;

    std::size_t snapshot_count() const { return times.size(); }

    /// Index of a named field; throws InvalidArgument if unknown.
    std::size_t field_index(const std::string& name) const;

    /// Appends a field; every snapshot must share the set grid and times.
    void add_field(const std::string& name, std::vector<FieldSnapshot> snaps);

    /// Checks grid, strictly increasing times, and per-snapshot shape.
    void validate() const;
};

std::string axis_name(Axis a);
Axis parse_axis(const std::string& s);

/// Wake-analysis plane layout relative to a rotor centered at
/// (rotor_x, 0, hub_height): YZ planes 0.5D..2.5D downstream, XY planes at
/// hub and hub +/- D/2, ZX planes at y = 0 and y = D/2.
std::vector<PlaneSpec> default_wake_planes(double rotor_diameter, double hub_height,
                                           double rotor_x = 0.0);

}  // namespace wakefsi
