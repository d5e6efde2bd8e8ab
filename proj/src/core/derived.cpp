#include "wakefsi/derived.hpp"

#include <array>

#include "wakefsi/error.hpp"

namespace wakefsi {

namespace {

void require_tensor(const FieldSnapshot& g) {
    require(g.components == 9, ErrorCode::InvalidArgument,
            "expected a 9-component gradient field");
    require(g.data.size() == g.grid.cell_count() * 9, ErrorCode::SizeMismatch,
            "gradient field length does not match its grid");
}

// d/dx_axis of component c at cell (i, j, k). Differences are divided by the
// matching differences of cell-centre coordinates (mathematically the usual
// multiples of h), so fields built from those coordinates differentiate
// without rounding error.
double partial(const FieldSnapshot& u, int axis, std::size_t i, std::size_t j, std::size_t k,
               std::size_t c) {
    const StructuredGrid& g = u.grid;
    const std::size_t n = g.count(static_cast<Axis>(axis));
    const double h = g.spacing(static_cast<Axis>(axis));
    const double lo = g.lower(static_cast<Axis>(axis));
    std::array<std::size_t, 3> idx{i, j, k};
    const std::size_t p = idx[axis];
    auto f = [&](std::size_t m) {
        idx[axis] = m;
        return u.at(idx[0], idx[1], idx[2], c);
    };
    auto x = [&](std::size_t m) { return lo + (static_cast<double>(m) + 0.5) * h; };
    if (n == 2) return (f(1) - f(0)) / (x(1) - x(0));
    if (p == 0)
        return (4.0 * (f(1) - f(0)) - (f(2) - f(0))) / (4.0 * (x(1) - x(0)) - (x(2) - x(0)));
    if (p == n - 1)
        return (4.0 * (f(n - 1) - f(n - 2)) - (f(n - 1) - f(n - 3))) /
               (4.0 * (x(n - 1) - x(n - 2)) - (x(n - 1) - x(n - 3)));
    return (f(p + 1) - f(p - 1)) / (x(p + 1) - x(p - 1));
}

}  // namespace

FieldSnapshot compute_gradient(const FieldSnapshot& velocity) {
    require(velocity.components == 3, ErrorCode::InvalidArgument,
            "gradient requires a 3-component vector field");
    const StructuredGrid& g = velocity.grid;
    for (int a = 0; a < 3; ++a)
        require(g.count(static_cast<Axis>(a)) >= 2, ErrorCode::InvalidArgument,
                "gradient: axis " + axis_name(static_cast<Axis>(a)) +
                    " has fewer than 2 cells");
    require(velocity.data.size() == g.cell_count() * 3, ErrorCode::SizeMismatch,
            "velocity field length does not match its grid");

    FieldSnapshot out(g, 9, velocity.time);
    for (std::size_t k = 0; k < g.nz; ++k)
        for (std::size_t j = 0; j < g.ny; ++j)
            for (std::size_t i = 0; i < g.nx; ++i)
                for (std::size_t comp = 0; comp < 3; ++comp)
                    for (int axis = 0; axis < 3; ++axis)
                        out.at(i, j, k, 3 * comp + axis) = partial(velocity, axis, i, j, k, comp);
    return out;
}

FieldSnapshot compute_strain_rate(const FieldSnapshot& gradient) {
    require_tensor(gradient);
    FieldSnapshot out(gradient.grid, 9, gradient.time);
    for (std::size_t cell = 0; cell < gradient.grid.cell_count(); ++cell) {
        const double* gr = &gradient.data[9 * cell];
        double* s = &out.data[9 * cell];
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) s[3 * r + c] = 0.5 * (gr[3 * r + c] + gr[3 * c + r]);
    }
    return out;
}

FieldSnapshot compute_rotation_rate(const FieldSnapshot& gradient) {
    require_tensor(gradient);
    FieldSnapshot out(gradient.grid, 9, gradient.time);
    for (std::size_t cell = 0; cell < gradient.grid.cell_count(); ++cell) {
        const double* gr = &gradient.data[9 * cell];
        double* w = &out.data[9 * cell];
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) w[3 * r + c] = 0.5 * (gr[3 * r + c] - gr[3 * c + r]);
    }
    return out;
}

FieldSnapshot compute_q_criterion(const FieldSnapshot& gradient) {
    require_tensor(gradient);
    FieldSnapshot out(gradient.grid, 1, gradient.time);
    for (std::size_t cell = 0; cell < gradient.grid.cell_count(); ++cell) {
        const double* gr = &gradient.data[9 * cell];
        double rot2 = 0.0, strain2 = 0.0;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                const double s = 0.5 * (gr[3 * r + c] + gr[3 * c + r]);
                const double w = 0.5 * (gr[3 * r + c] - gr[3 * c + r]);
                strain2 += s * s;
                rot2 += w * w;
            }
        out.data[cell] = 0.5 * (rot2 - strain2);
    }
    return out;
}

}  // namespace wakefsi
