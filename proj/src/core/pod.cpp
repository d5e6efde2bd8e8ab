#include "wakefsi/pod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "wakefsi/error.hpp"
#include "wakefsi/jacobi.hpp"

namespace wakefsi {

namespace {

void check_weights(const std::optional<Eigen::VectorXd>& w, Eigen::Index rows) {
    if (!w) return;
    require(w->size() == rows, ErrorCode::SizeMismatch, "weights length differs from row count");
    for (Eigen::Index i = 0; i < w->size(); ++i)
        require(std::isfinite((*w)(i)) && (*w)(i) > 0.0, ErrorCode::InvalidArgument,
                "weights must be finite and > 0");
}

// Descending order; equal values keep their original index order.
std::vector<Eigen::Index> descending_order(const Eigen::VectorXd& values) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
    return order;
}

// Flip each mode so that its largest-magnitude entry (lowest index on ties)
// is positive; coefficients follow.
void apply_sign_convention(PodResult& r) {
    for (Eigen::Index n = 0; n < r.rank(); ++n) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < r.modes.rows(); ++i) {
            const double m = std::abs(r.modes(i, n));
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        if (r.modes(arg, n) < 0.0) {
            r.modes.col(n) *= -1.0;
            r.temporal_coeffs.row(n) *= -1.0;
        }
    }
}

PodResult empty_result(const SnapshotMatrix& m, Eigen::Index rank) {
    PodResult r;
    r.modes.resize(m.rows(), rank);
    r.singular_values.resize(rank);
    r.temporal_coeffs.resize(rank, m.cols());
    r.weights = m.weights;
    r.mean_subtracted = m.mean_subtracted;
    r.mean = m.mean;
    return r;
}

}  // namespace

void SnapshotMatrix::validate() const {
    require(data.rows() >= 1 && data.cols() >= 1, ErrorCode::InvalidArgument,
            "snapshot matrix must have at least one row and one column");
    require(data.allFinite(), ErrorCode::NonFinite, "snapshot matrix has non-finite entries");
    check_weights(weights, data.rows());
    if (mean_subtracted) {
        require(mean.has_value() && mean->size() == data.rows(), ErrorCode::InvalidArgument,
                "mean-subtracted matrix requires a stored mean of length N");
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            const double tol = std::max(1e-10 * data.row(i).norm(), 1e-14);
            require(std::abs(data.row(i).sum()) <= tol, ErrorCode::InvalidArgument,
                    "mean-subtracted matrix row " + std::to_string(i) + " does not sum to zero");
        }
    }
}

SnapshotMatrix assemble_snapshot_matrix(const SnapshotSet& set, const std::string& field,
                                        std::optional<std::size_t> component, bool subtract_mean,
                                        std::optional<Eigen::VectorXd> weights) {
    const std::size_t f = set.field_index(field);
    const std::size_t comps = set.fields[f].components;
    if (component)
        require(*component < comps, ErrorCode::OutOfRange,
                "component " + std::to_string(*component) + " out of range for field '" + field +
                    "' with " + std::to_string(comps) + " components");
    const std::size_t snaps = set.snapshot_count();
    require(snaps >= 1, ErrorCode::InvalidArgument, "snapshot matrix needs at least one snapshot");

    const std::size_t cells = set.grid.cell_count();
    const std::size_t per_cell = component ? 1 : comps;
    SnapshotMatrix m;
    m.data.resize(static_cast<Eigen::Index>(cells * per_cell), static_cast<Eigen::Index>(snaps));
    for (std::size_t s = 0; s < snaps; ++s) {
        const auto& values = set.snapshots[f][s].data;
        if (component) {
            for (std::size_t cell = 0; cell < cells; ++cell)
                m.data(static_cast<Eigen::Index>(cell), static_cast<Eigen::Index>(s)) =
                    values[cell * comps + *component];
        } else {
            for (std::size_t n = 0; n < cells * comps; ++n)
                m.data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s)) = values[n];
        }
    }
    m.weights = std::move(weights);
    check_weights(m.weights, m.data.rows());

    if (subtract_mean) {
        Eigen::VectorXd mean = m.data.rowwise().sum() / static_cast<double>(snaps);
        m.data.colwise() -= mean;
        // Second pass removes the rounding residue of the first.
        const Eigen::VectorXd residue = m.data.rowwise().sum() / static_cast<double>(snaps);
        m.data.colwise() -= residue;
        mean += residue;
        m.mean = std::move(mean);
        m.mean_subtracted = true;
    }
    m.validate();
    return m;
}

Eigen::MatrixXd weighted_gram(const SnapshotMatrix& m) {
    const Eigen::Index s = m.cols();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(s, s);
    for (Eigen::Index a = 0; a < s; ++a)
        for (Eigen::Index b = a; b < s; ++b) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                const double w = m.weights ? (*m.weights)(i) : 1.0;
                acc += w * m.data(i, a) * m.data(i, b);
            }
            c(a, b) = acc;
            c(b, a) = acc;
        }
    return c;
}

PodResult pod_method_of_snapshots(const SnapshotMatrix& m) {
    m.validate();
    const SymmetricEigen eig = jacobi_eigen(weighted_gram(m));
    const auto order = descending_order(eig.values);
    const double lambda_max = eig.values.size() > 0 ? std::max(eig.values(order.front()), 0.0) : 0.0;

    Eigen::Index rank = 0;
    if (lambda_max > 0.0)
        for (Eigen::Index idx : order) {
            if (eig.values(idx) > kRankCutoff * lambda_max) ++rank;
            else break;
        }

    PodResult r = empty_result(m, rank);
    for (Eigen::Index n = 0; n < rank; ++n) {
        const Eigen::Index idx = order[static_cast<std::size_t>(n)];
        const double sigma = std::sqrt(std::max(eig.values(idx), 0.0));
        r.singular_values(n) = sigma;
        r.modes.col(n) = m.data * eig.vectors.col(idx) / sigma;
        r.temporal_coeffs.row(n) = sigma * eig.vectors.col(idx).transpose();
    }
    apply_sign_convention(r);
    return r;
}

PodResult pod_direct_svd(const SnapshotMatrix& m) {
    m.validate();
    Eigen::MatrixXd scaled = m.data;
    if (m.weights) scaled = m.weights->cwiseSqrt().asDiagonal() * scaled;
    const OneSidedSvd svd = one_sided_jacobi(scaled);

    const Eigen::VectorXd norms = svd.u_scaled.colwise().norm().transpose();
    const auto order = descending_order(norms);
    const double sigma_max = norms.size() > 0 ? norms(order.front()) : 0.0;

    Eigen::Index rank = 0;
    if (sigma_max > 0.0)
        for (Eigen::Index idx : order) {
            if (norms(idx) * norms(idx) > kRankCutoff * sigma_max * sigma_max) ++rank;
            else break;
        }

    PodResult r = empty_result(m, rank);
    for (Eigen::Index n = 0; n < rank; ++n) {
        const Eigen::Index idx = order[static_cast<std::size_t>(n)];
        const double sigma = norms(idx);
        r.singular_values(n) = sigma;
        Eigen::VectorXd mode = svd.u_scaled.col(idx) / sigma;
        if (m.weights) mode = mode.cwiseQuotient(m.weights->cwiseSqrt());
        r.modes.col(n) = mode;
        r.temporal_coeffs.row(n) = sigma * svd.v.col(idx).transpose();
    }
    apply_sign_convention(r);
    return r;
}

double cumulative_energy(const PodResult& r, std::size_t n_modes) {
    require(n_modes <= static_cast<std::size_t>(r.rank()), ErrorCode::OutOfRange,
            "cumulative_energy: " + std::to_string(n_modes) + " modes requested, rank is " +
                std::to_string(r.rank()));
    if (r.rank() == 0) return 1.0;
    double kept = 0.0, total = 0.0;
    for (Eigen::Index n = 0; n < r.rank(); ++n) {
        const double e = r.singular_values(n) * r.singular_values(n);
        total += e;
        if (static_cast<std::size_t>(n) < n_modes) kept += e;
    }
    return kept / total;
}

Eigen::VectorXd energy_fractions(const PodResult& r) {
    const Eigen::VectorXd e = r.singular_values.array().square();
    const double total = e.sum();
    return total > 0.0 ? Eigen::VectorXd(e / total) : e;
}

SnapshotMatrix reconstruct(const PodResult& r, std::size_t n_modes) {
    require(n_modes <= static_cast<std::size_t>(r.rank()), ErrorCode::OutOfRange,
            "reconstruct: " + std::to_string(n_modes) + " modes requested, rank is " +
                std::to_string(r.rank()));
    const auto n = static_cast<Eigen::Index>(n_modes);
    SnapshotMatrix out;
    out.data = Eigen::MatrixXd::Zero(r.rows(), r.snapshots());
    if (n > 0) out.data = r.modes.leftCols(n) * r.temporal_coeffs.topRows(n);
    if (r.mean_subtracted && r.mean) out.data.colwise() += *r.mean;
    out.weights = r.weights;
    return out;
}

Eigen::VectorXd project(const Eigen::VectorXd& snapshot, const PodResult& r, std::size_t n_modes) {
    require(snapshot.size() == r.rows(), ErrorCode::SizeMismatch,
            "project: snapshot length " + std::to_string(snapshot.size()) + " differs from " +
                std::to_string(r.rows()));
    require(n_modes <= static_cast<std::size_t>(r.rank()), ErrorCode::OutOfRange,
            "project: more modes than the rank");
    Eigen::VectorXd x = snapshot;
    if (r.mean_subtracted && r.mean) x -= *r.mean;
    if (r.weights) x = x.cwiseProduct(*r.weights);
    return r.modes.leftCols(static_cast<Eigen::Index>(n_modes)).transpose() * x;
}

double weighted_frobenius(const Eigen::MatrixXd& a, const std::optional<Eigen::VectorXd>& weights) {
    if (!weights) return a.norm();
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) s += (*weights)(i) * a.row(i).squaredNorm();
    return std::sqrt(s);
}

}  // namespace wakefsi
