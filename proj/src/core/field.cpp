#include "wakefsi/field.hpp"

#include <cmath>
#include <string>

#include "wakefsi/error.hpp"

namespace wakefsi {

void StructuredGrid::validate() const {
    require(nx >= 1 && ny >= 1 && nz >= 1, ErrorCode::InvalidArgument,
            "grid: cell counts must be >= 1");
    require(dx > 0.0 && dy > 0.0 && dz > 0.0, ErrorCode::InvalidArgument,
            "grid: spacings must be > 0");
    for (double o : origin)
        require(std::isfinite(o), ErrorCode::InvalidArgument, "grid: origin must be finite");
}

std::size_t StructuredGrid::count(Axis a) const {
    switch (a) {
    case Axis::X: return nx;
    case Axis::Y: return ny;
    case Axis::Z: return nz;
    }
    return 0;
}

double StructuredGrid::spacing(Axis a) const {
    switch (a) {
    case Axis::X: return dx;
    case Axis::Y: return dy;
    case Axis::Z: return dz;
    }
    return 0.0;
}

std::array<double, 3> StructuredGrid::cell_center(std::size_t i, std::size_t j,
                                                  std::size_t k) const {
    return {origin[0] + (static_cast<double>(i) + 0.5) * dx,
            origin[1] + (static_cast<double>(j) + 0.5) * dy,
            origin[2] + (static_cast<double>(k) + 0.5) * dz};
}

FieldSnapshot::FieldSnapshot(const StructuredGrid& g, std::size_t comps, double t)
    : grid(g), components(comps), time(t), data(g.cell_count() * comps, 0.0) {}

void FieldSnapshot::validate() const {
    grid.validate();
    require(components >= 1, ErrorCode::InvalidArgument, "snapshot: components must be >= 1");
    const std::size_t expected = grid.cell_count() * components;
    require(data.size() == expected, ErrorCode::SizeMismatch,
            "size mismatch: expected " + std::to_string(expected) + " values, got " +
                std::to_string(data.size()));
    for (std::size_t n = 0; n < data.size(); ++n)
        require(std::isfinite(data[n]), ErrorCode::NonFinite,
                "non-finite value at index " + std::to_string(n));
}

std::size_t SnapshotSet::field_index(const std::string& name) const {
    for (std::size_t f = 0; f < fields.size(); ++f)
        if (fields[f].name == name) return f;
    fail(ErrorCode::InvalidArgument, "unknown field '" + name + "'");
}

void SnapshotSet::add_field(const std::string& name, std::vector<FieldSnapshot> snaps) {
    require(snaps.size() == times.size(), ErrorCode::InvalidArgument,
            "add_field: snapshot count differs from time count");
    for (const auto& f : fields)
        require(f.name != name, ErrorCode::InvalidArgument, "add_field: duplicate field " + name);
    const std::size_t comps = snaps.empty() ? 1 : snaps.front().components;
    fields.push_back({name, comps});
    snapshots.push_back(std::move(snaps));
}

void SnapshotSet::validate() const {
    grid.validate();
    require(snapshots.size() == fields.size(), ErrorCode::InvalidArgument,
            "snapshot set: one snapshot list per field required");
    require(!fields.empty(), ErrorCode::InvalidArgument, "snapshot set: no fields");
    for (std::size_t s = 1; s < times.size(); ++s)
        require(times[s] > times[s - 1], ErrorCode::InvalidArgument,
                "snapshot set: times must be strictly increasing");
    for (double t : times)
        require(std::isfinite(t), ErrorCode::NonFinite, "snapshot set: non-finite time");
    require(pattern.find("{index}") != std::string::npos, ErrorCode::InvalidArgument,
            "snapshot set: pattern must contain {index}");
    if (fields.size() > 1)
        require(pattern.find("{field}") != std::string::npos, ErrorCode::InvalidArgument,
                "snapshot set: multi-field pattern must contain {field}");
    for (std::size_t f = 0; f < fields.size(); ++f) {
        require(!fields[f].name.empty(), ErrorCode::InvalidArgument, "snapshot set: empty field name");
        require(snapshots[f].size() == times.size(), ErrorCode::InvalidArgument,
                "snapshot set: field '" + fields[f].name + "' snapshot count mismatch");
        for (std::size_t s = 0; s < times.size(); ++s) {
            const FieldSnapshot& snap = snapshots[f][s];
            require(snap.grid == grid, ErrorCode::InvalidArgument,
                    "snapshot set: snapshot grid differs from manifest grid");
            require(snap.components == fields[f].components, ErrorCode::InvalidArgument,
                    "snapshot set: component count mismatch in field '" + fields[f].name + "'");
            require(snap.time == times[s], ErrorCode::InvalidArgument,
                    "snapshot set: snapshot time differs from manifest time");
            snap.validate();
        }
    }
}

std::string axis_name(Axis a) {
    switch (a) {
    case Axis::X: return "X";
    case Axis::Y: return "Y";
    case Axis::Z: return "Z";
    }
    return "?";
}

Axis parse_axis(const std::string& s) {
    if (s == "X" || s == "x") return Axis::X;
    if (s == "Y" || s == "y") return Axis::Y;
    if (s == "Z" || s == "z") return Axis::Z;
    fail(ErrorCode::InvalidArgument, "unknown axis '" + s + "'");
}

std::vector<PlaneSpec> default_wake_planes(double rotor_diameter, double hub_height,
                                           double rotor_x) {
    const double d = rotor_diameter;
    std::vector<PlaneSpec> planes;
    const char* yz_labels[] = {"YZ_0.5D", "YZ_1.0D", "YZ_1.5D", "YZ_2.0D", "YZ_2.5D"};
    for (int n = 0; n < 5; ++n)
        planes.push_back({Axis::X, rotor_x + 0.5 * (n + 1) * d, yz_labels[n]});
    planes.push_back({Axis::Z, hub_height, "XY_hub"});
    planes.push_back({Axis::Z, hub_height + 0.5 * d, "XY_tip_top"});
    planes.push_back({Axis::Z, hub_height - 0.5 * d, "XY_tip_bottom"});
    planes.push_back({Axis::Y, 0.0, "ZX_hub"});
    planes.push_back({Axis::Y, 0.5 * d, "ZX_tip"});
    return planes;
}

}  // namespace wakefsi
