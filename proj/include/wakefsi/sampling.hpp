#pragma once

#include <array>

#include "wakefsi/field.hpp"

namespace wakefsi {

/// Trilinear interpolation of cell-center data at a physical point.
/// Points between the outermost cell centers and the domain faces clamp to
/// the boundary layer; points outside the box are rejected.
double interpolate(const FieldSnapshot& snap, const std::array<double, 3>& point,
                   std::size_t component);

/// Samples a field on a plane. The result keeps the in-plane cell-center
/// lattice and collapses the normal axis to a single cell centered on the
/// plane offset.
FieldSnapshot sample_plane(const FieldSnapshot& snap, const PlaneSpec& plane);

/// sample_plane applied to every snapshot of every field.
SnapshotSet sample_plane(const SnapshotSet& set, const PlaneSpec& plane);

}  // namespace wakefsi
