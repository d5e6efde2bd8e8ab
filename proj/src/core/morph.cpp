#include "wakefsi/morph.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "wakefsi/error.hpp"

namespace wakefsi {

namespace fs = std::filesystem;

namespace {

constexpr double kCenterTolerance = 1e-10;

Eigen::RowVectorXd affine_row(const Eigen::VectorXd& x) {
    Eigen::RowVectorXd row(x.size() + 1);
    row(0) = 1.0;
    row.tail(x.size()) = x.transpose();
    return row;
}

double det2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

double rbf_kernel_value(RbfKernel kernel, double r) {
    switch (kernel) {
    case RbfKernel::ThinPlate: return r > 0.0 ? r * r * std::log(r) : 0.0;
    case RbfKernel::Cubic: return r * r * r;
    }
    return 0.0;
}

RbfKernel default_kernel(Eigen::Index dim) { return dim == 2 ? RbfKernel::ThinPlate : RbfKernel::Cubic; }

RbfInterpolant::RbfInterpolant(RbfKernel kernel, Eigen::MatrixXd centers, Eigen::MatrixXd weights,
                               Eigen::MatrixXd affine)
    : kernel_(kernel), centers_(std::move(centers)), weights_(std::move(weights)), affine_(std::move(affine)) {}

Eigen::VectorXd RbfInterpolant::evaluate(const Eigen::VectorXd& point) const {
    require(point.size() == dim(), ErrorCode::SizeMismatch, "rbf: point dimension mismatch");
    Eigen::VectorXd out = (affine_row(point) * affine_).transpose();
    for (Eigen::Index i = 0; i < centers_.rows(); ++i) {
        const double r = (point - centers_.row(i).transpose()).norm();
        out += rbf_kernel_value(kernel_, r) * weights_.row(i).transpose();
    }
    return out;
}

RbfInterpolant build_rbf(const ControlPoints& points, RbfKernel kernel) {
    const Eigen::Index n = points.size();
    const Eigen::Index d = points.dim();
    require(d == 2 || d == 3, ErrorCode::InvalidArgument, "rbf: dimension must be 2 or 3");
    require(points.displacements.rows() == n && points.displacements.cols() == d,
            ErrorCode::SizeMismatch, "rbf: displacement array must be n x dim");
    require(points.positions.allFinite() && points.displacements.allFinite(), ErrorCode::NonFinite,
            "rbf: control points must be finite");
    require(n >= d + 1, ErrorCode::InvalidArgument,
            "rbf: need at least " + std::to_string(d + 1) + " control points");

    const double extent = std::max(
        (points.positions.colwise().maxCoeff() - points.positions.colwise().minCoeff()).maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            require((points.positions.row(i) - points.positions.row(j)).norm() > 1e-12 * extent,
                    ErrorCode::InvalidArgument,
                    "rbf: duplicate control positions " + std::to_string(i) + " and " + std::to_string(j));

    Eigen::MatrixXd poly(n, d + 1);
    for (Eigen::Index i = 0; i < n; ++i) poly.row(i) = affine_row(points.positions.row(i).transpose());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(poly);
    qr.setThreshold(1e-10);
    require(qr.rank() == d + 1, ErrorCode::InvalidArgument, "rbf: control points are affinely degenerate");

    const Eigen::Index m = n + d + 1;
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            system(i, j) = rbf_kernel_value(
                kernel, (points.positions.row(i) - points.positions.row(j)).norm());
    system.topRightCorner(n, d + 1) = poly;
    system.bottomLeftCorner(d + 1, n) = poly.transpose();

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, d);
    rhs.topRows(n) = points.displacements;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    require(lu.rcond() > 1e-15, ErrorCode::Singular, "rbf: interpolation system is singular");
    const Eigen::MatrixXd sol = lu.solve(rhs);

    RbfInterpolant f(kernel, points.positions, sol.topRows(n), sol.bottomRows(d + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double err =
            (f.evaluate(points.positions.row(i).transpose()) - points.displacements.row(i).transpose())
                .cwiseAbs()
                .maxCoeff();
        require(err <= kCenterTolerance * std::max(1.0, points.displacements.cwiseAbs().maxCoeff()),
                ErrorCode::Numerical, "rbf: interpolation residual too large at control point " +
                                          std::to_string(i));
    }
    return f;
}

Eigen::VectorXd evaluate_displacement(const RbfInterpolant& f, const Eigen::VectorXd& point) {
    return f.evaluate(point);
}

Eigen::MatrixXd morph_nodes(const Eigen::MatrixXd& nodes, const RbfInterpolant& f) {
    require(nodes.cols() == f.dim(), ErrorCode::SizeMismatch, "morph: node dimension mismatch");
    Eigen::MatrixXd out = nodes;
    for (Eigen::Index i = 0; i < nodes.rows(); ++i)
        out.row(i) += f.evaluate(nodes.row(i).transpose()).transpose();
    return out;
}

NodeLattice node_lattice(const StructuredGrid& grid, int dim) {
    grid.validate();
    require(dim == 2 || dim == 3, ErrorCode::InvalidArgument, "node lattice: dim must be 2 or 3");
    NodeLattice lat;
    lat.dim = dim;
    lat.nx = grid.nx;
    lat.ny = grid.ny;
    lat.nz = dim == 2 ? 0 : grid.nz;
    const std::size_t kmax = dim == 2 ? 0 : grid.nz;
    lat.coords.resize(static_cast<Eigen::Index>((grid.nx + 1) * (grid.ny + 1) * (kmax + 1)), dim);
    for (std::size_t k = 0; k <= kmax; ++k)
        for (std::size_t j = 0; j <= grid.ny; ++j)
            for (std::size_t i = 0; i <= grid.nx; ++i) {
                const auto row = static_cast<Eigen::Index>(lat.node_index(i, j, k));
                lat.coords(row, 0) = grid.origin[0] + static_cast<double>(i) * grid.dx;
                lat.coords(row, 1) = grid.origin[1] + static_cast<double>(j) * grid.dy;
                if (dim == 3) lat.coords(row, 2) = grid.origin[2] + static_cast<double>(k) * grid.dz;
            }
    return lat;
}

MeshValidity check_mesh_validity(const NodeLattice& lat, const Eigen::MatrixXd& x) {
    require(x.rows() == lat.coords.rows() && x.cols() == lat.dim, ErrorCode::SizeMismatch,
            "mesh validity: morphed coordinates do not match the lattice");
    MeshValidity out;
    out.min_jacobian = std::numeric_limits<double>::infinity();
    auto node = [&](std::size_t i, std::size_t j, std::size_t k) {
        return x.row(static_cast<Eigen::Index>(lat.node_index(i, j, k))).transpose();
    };

    if (lat.dim == 2) {
        for (std::size_t j = 0; j < lat.ny; ++j)
            for (std::size_t i = 0; i < lat.nx; ++i) {
                const Eigen::Vector2d p00 = node(i, j, 0), p10 = node(i + 1, j, 0);
                const Eigen::Vector2d p01 = node(i, j + 1, 0), p11 = node(i + 1, j + 1, 0);
                const double dets[4] = {det2(p10 - p00, p01 - p00), det2(p10 - p00, p11 - p10),
                                        det2(p11 - p01, p01 - p00), det2(p11 - p01, p11 - p10)};
                bool inverted = false;
                for (double det : dets) {
                    out.min_jacobian = std::min(out.min_jacobian, det);
                    inverted |= det <= 0.0;
                }
                out.inverted_cells += inverted ? 1 : 0;
                ++out.cells;
            }
        return out;
    }

    for (std::size_t k = 0; k < lat.nz; ++k)
        for (std::size_t j = 0; j < lat.ny; ++j)
            for (std::size_t i = 0; i < lat.nx; ++i) {
                bool inverted = false;
                for (std::size_t c = 0; c < 8; ++c) {
                    const std::size_t a = c & 1u, b = (c >> 1) & 1u, e = (c >> 2) & 1u;
                    const Eigen::Vector3d dxi = node(i + 1, j + b, k + e) - node(i, j + b, k + e);
                    const Eigen::Vector3d deta = node(i + a, j + 1, k + e) - node(i + a, j, k + e);
                    const Eigen::Vector3d dzeta = node(i + a, j + b, k + 1) - node(i + a, j + b, k);
                    const double det = dxi.dot(deta.cross(dzeta));
                    out.min_jacobian = std::min(out.min_jacobian, det);
                    inverted |= det <= 0.0;
                }
                out.inverted_cells += inverted ? 1 : 0;
                ++out.cells;
            }
    return out;
}

ControlPoints read_control_points_csv(const fs::path& file) {
    std::ifstream in(file);
    if (!in) fail(ErrorCode::Io, "cannot open control points " + file.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            require(rows.empty() && line_no == 1, ErrorCode::InvalidArgument,
                    "control points: malformed line " + std::to_string(line_no));
            continue;  // header
        }
        require(values.size() == 4 || values.size() == 6, ErrorCode::InvalidArgument,
                "control points: line " + std::to_string(line_no) + " needs 4 or 6 columns");
        require(rows.empty() || rows.front().size() == values.size(), ErrorCode::InvalidArgument,
                "control points: inconsistent column count at line " + std::to_string(line_no));
        rows.push_back(std::move(values));
    }
    require(!rows.empty(), ErrorCode::InvalidArgument, "control points: file has no data rows");
    const auto dim = static_cast<Eigen::Index>(rows.front().size() / 2);
    ControlPoints cp;
    cp.positions.resize(static_cast<Eigen::Index>(rows.size()), dim);
    cp.displacements.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (Eigen::Index c = 0; c < dim; ++c) {
            cp.positions(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
            cp.displacements(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c + dim)];
        }
    return cp;
}

}  // namespace wakefsi
