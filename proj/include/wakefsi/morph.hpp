#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "wakefsi/field.hpp"

namespace wakefsi {

enum class RbfKernel { ThinPlate, Cubic };

/// Control points: one row per point, `dim` position columns and `dim`
/// displacement columns.
struct ControlPoints {
    Eigen::MatrixXd positions;
    Eigen::MatrixXd displacements;

    Eigen::Index size() const { return positions.rows(); }
    Eigen::Index dim() const { return positions.cols(); }
};

/// Radial basis interpolant with linear polynomial augmentation:
///   s(x) = sum_i w_i phi(|x - c_i|) + b_0 + B x
class RbfInterpolant {
public:
    RbfInterpolant(RbfKernel kernel, Eigen::MatrixXd centers, Eigen::MatrixXd weights,
                   Eigen::MatrixXd affine);

    Eigen::VectorXd evaluate(const Eigen::VectorXd& point) const;

    RbfKernel kernel() const { return kernel_; }
    Eigen::Index dim() const { return centers_.cols(); }
    const Eigen::MatrixXd& centers() const { return centers_; }
    const Eigen::MatrixXd& weights() const { return weights_; }
    /// (dim + 1) x dim; row 0 is the constant term.
    const Eigen::MatrixXd& affine() const { return affine_; }

private:
    RbfKernel kernel_;
    Eigen::MatrixXd centers_;
    Eigen::MatrixXd weights_;
    Eigen::MatrixXd affine_;
};

double rbf_kernel_value(RbfKernel kernel, double r);

/// Thin-plate in 2D, cubic in 3D.
RbfKernel default_kernel(Eigen::Index dim);

/// Solves the augmented interpolation system. Throws InvalidArgument for
/// duplicate centers, too few points or an affinely degenerate set.
RbfInterpolant build_rbf(const ControlPoints& points, RbfKernel kernel);

Eigen::VectorXd evaluate_displacement(const RbfInterpolant& f, const Eigen::VectorXd& point);

/// x -> x + s(x) for every row.
Eigen::MatrixXd morph_nodes(const Eigen::MatrixXd& nodes, const RbfInterpolant& f);

/// Vertex lattice of a structured grid in 2D (x, y; nz ignored) or 3D.
/// Node (i, j, k) is row (k*(ny+1) + j)*(nx+1) + i.
struct NodeLattice {
    int dim = 2;
    std::size_t nx = 1, ny = 1, nz = 1;  // cell counts
    Eigen::MatrixXd coords;

    std::size_t node_index(std::size_t i, std::size_t j, std::size_t k) const {
        return (k * (ny + 1) + j) * (nx + 1) + i;
    }
    std::size_t cell_count() const { return dim == 2 ? nx * ny : nx * ny * nz; }
};

NodeLattice node_lattice(const StructuredGrid& grid, int dim);

struct MeshValidity {
    double min_jacobian = 0.0;
    std::size_t inverted_cells = 0;
    std::size_t cells = 0;
};

/// Jacobian determinant of each cell's bilinear/trilinear map evaluated at
/// every cell corner, with a unit reference cell. A cell is inverted if any
/// corner determinant is <= 0.
MeshValidity check_mesh_validity(const NodeLattice& original, const Eigen::MatrixXd& morphed);

/// Rows "x,y[,z],dx,dy[,dz]"; a non-numeric first line is a header.
ControlPoints read_control_points_csv(const std::filesystem::path& file);

}  // namespace wakefsi
