#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "wakefsi/field.hpp"

namespace wakefsi {

/// Snapshot matrix: one column per snapshot, one row per spatial sample
/// (cells x selected components, field-core ordering).
struct SnapshotMatrix {
    Eigen::MatrixXd data;
    std::optional<Eigen::VectorXd> weights;   // per-row quadrature weights
    bool mean_subtracted = false;
    std::optional<Eigen::VectorXd> mean;      // present iff mean_subtracted

    Eigen::Index rows() const { return data.rows(); }
    Eigen::Index cols() const { return data.cols(); }

    void validate() const;
};

struct PodResult {
    Eigen::MatrixXd modes;            // N x r, W-orthonormal columns
    Eigen::VectorXd singular_values;  // r, descending
    Eigen::MatrixXd temporal_coeffs;  // r x S
    std::optional<Eigen::VectorXd> weights;
    bool mean_subtracted = false;
    std::optional<Eigen::VectorXd> mean;

    Eigen::Index rank() const { return singular_values.size(); }
    Eigen::Index rows() const { return modes.rows(); }
    Eigen::Index snapshots() const { return temporal_coeffs.cols(); }
};

/// Relative eigenvalue cutoff for the POD rank: lambda > kRankCutoff * lambda_max.
inline constexpr double kRankCutoff = 1e-12;

/// Builds the snapshot matrix of one field. `component` selects a single
/// component; std::nullopt keeps all components interleaved per cell.
SnapshotMatrix assemble_snapshot_matrix(const SnapshotSet& set, const std::string& field,
                                        std::optional<std::size_t> component,
                                        bool subtract_mean,
                                        std::optional<Eigen::VectorXd> weights = std::nullopt);

/// C = phi^T W phi accumulated in ascending row order.
Eigen::MatrixXd weighted_gram(const SnapshotMatrix& m);

/// Method of snapshots: Jacobi eigen-decomposition of the S x S Gram matrix.
PodResult pod_method_of_snapshots(const SnapshotMatrix& m);

/// One-sided Jacobi SVD of W^{1/2} phi.
PodResult pod_direct_svd(const SnapshotMatrix& m);

/// Retained energy fraction sum_{n<N} sigma_n^2 / sum sigma_n^2.
/// The loss is 1 - retained. Throws OutOfRange if n_modes > rank.
double cumulative_energy(const PodResult& r, std::size_t n_modes);

/// sigma_n^2 / sum sigma^2 for every mode.
Eigen::VectorXd energy_fractions(const PodResult& r);

/// Sum of the first n_modes rank-one terms (plus the stored mean).
SnapshotMatrix reconstruct(const PodResult& r, std::size_t n_modes);

/// modes[:, :n]^T W (snapshot - mean).
Eigen::VectorXd project(const Eigen::VectorXd& snapshot, const PodResult& r,
                        std::size_t n_modes);

/// Frobenius norm with row weights, sqrt(sum_i w_i sum_s phi_is^2).
double weighted_frobenius(const Eigen::MatrixXd& a,
                          const std::optional<Eigen::VectorXd>& weights);

}  // namespace wakefsi
