#include "wakefsi/jacobi.hpp"

#include <cmath>
#include <limits>

#include "wakefsi/error.hpp"

namespace wakefsi {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

// tan of the rotation angle that annihilates the (p, q) coupling; smaller root.
double rotation_tangent(double zeta) {
    const double t = 1.0 / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
    return zeta >= 0.0 ? t : -t;
}

}  // namespace

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& input, double rel_tol, int max_sweeps) {
    require(input.rows() == input.cols(), ErrorCode::InvalidArgument,
            "jacobi_eigen: matrix must be square");
    const Eigen::Index n = input.rows();
    Eigen::MatrixXd a = input;
    SymmetricEigen out;
    out.vectors = Eigen::MatrixXd::Identity(n, n);

    const double scale = a.norm();
    if (scale == 0.0 || n <= 1) {
        out.values = a.diagonal();
        return out;
    }
    const double threshold = rel_tol * scale;

    int sweep = 0;
    while (off_diagonal_norm(a) > threshold) {
        if (sweep == max_sweeps)
            fail(ErrorCode::Numerical, "jacobi_eigen: no convergence after " +
                                           std::to_string(max_sweeps) + " sweeps");
        ++sweep;
        for (Eigen::Index p = 0; p < n - 1; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double t = rotation_tangent((a(q, q) - a(p, p)) / (2.0 * apq));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = out.vectors(k, p), vkq = out.vectors(k, q);
                    out.vectors(k, p) = c * vkp - s * vkq;
                    out.vectors(k, q) = s * vkp + c * vkq;
                }
            }
    }
    out.values = a.diagonal();
    out.sweeps = sweep;
    return out;
}

OneSidedSvd one_sided_jacobi(const Eigen::MatrixXd& input, double rel_tol, int max_sweeps) {
    const Eigen::Index n = input.cols();
    OneSidedSvd out;
    out.u_scaled = input;
    out.v = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd& a = out.u_scaled;

    // A dot product of two columns carries rounding error up to ~rows * eps
    // relative to the product of their norms; a tighter test can cycle.
    const double tol = std::max(rel_tol, static_cast<double>(std::max<Eigen::Index>(input.rows(), 1)) *
                                             std::numeric_limits<double>::epsilon());

    // Columns at rounding level (e.g. the surplus columns of a wide matrix)
    // cannot be made mutually orthogonal and carry no resolvable energy.
    const double negligible = static_cast<double>(std::max(input.rows(), n)) *
                              std::numeric_limits<double>::epsilon() * input.norm();
    const double negligible_sq = negligible * negligible;

    bool rotated = true;
    int sweep = 0;
    while (rotated) {
        if (sweep == max_sweeps)
            fail(ErrorCode::Numerical, "one_sided_jacobi: no convergence after " +
                                           std::to_string(max_sweeps) + " sweeps");
        rotated = false;
        ++sweep;
        for (Eigen::Index p = 0; p < n - 1; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = a.col(p).squaredNorm();
                const double beta = a.col(q).squaredNorm();
                const double gamma = a.col(p).dot(a.col(q));
                if (alpha <= negligible_sq || beta <= negligible_sq) continue;
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double t = rotation_tangent((beta - alpha) / (2.0 * gamma));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (Eigen::Index k = 0; k < a.rows(); ++k) {
                    const double ap = a(k, p), aq = a(k, q);
                    a(k, p) = c * ap - s * aq;
                    a(k, q) = s * ap + c * aq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vp = out.v(k, p), vq = out.v(k, q);
                    out.v(k, p) = c * vp - s * vq;
                    out.v(k, q) = s * vp + c * vq;
                }
            }
    }
    out.sweeps = sweep;
    return out;
}

}  // namespace wakefsi
