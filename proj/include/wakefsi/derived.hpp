#pragma once

#include "wakefsi/field.hpp"

namespace wakefsi {

/// Velocity gradient du_i/dx_j, 9 components per cell stored row-major
/// (component 3*i + j). Central differences inside, one-sided second order
/// at the boundaries; an axis with exactly 2 cells uses the two-point
/// difference.
FieldSnapshot compute_gradient(const FieldSnapshot& velocity);

/// Symmetric part of a gradient field.
FieldSnapshot compute_strain_rate(const FieldSnapshot& gradient);

/// Antisymmetric part of a gradient field, computed as (G - G^T)/2 so that
/// the result is exactly antisymmetric.
FieldSnapshot compute_rotation_rate(const FieldSnapshot& gradient);

/// Q = (|Omega|^2 - |S|^2) / 2 with Frobenius norms.
FieldSnapshot compute_q_criterion(const FieldSnapshot& gradient);

}  // namespace wakefsi
