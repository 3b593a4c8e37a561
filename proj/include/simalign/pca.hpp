#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace simalign {

struct CenteredMatrix {
    Eigen::MatrixXd centered;
    Eigen::VectorXd means;
};

CenteredMatrix center_columns(const Eigen::MatrixXd& x);

// Principal components of a column-centered matrix whose rows are
// observations. u = min(rows - 1, cols) components are kept.
struct PcaResult {
    Eigen::MatrixXd scores;        // rows x u, column k = projection on PC k
    Eigen::VectorXd eigenvalues;   // u, non-increasing, sample covariance (rows - 1)
    Eigen::VectorXd column_means;  // cols; zeros unless filled by the caller
    Eigen::MatrixXd loadings;      // cols x u, orthonormal columns

    Eigen::Index components() const { return eigenvalues.size(); }
};

// SVD of the centered matrix; the covariance matrix is never formed. Each
// loading column is sign-flipped so that its largest-magnitude entry (lowest
// index on ties) is positive. Throws NumericalError if the SVD fails.
PcaResult pca(const Eigen::MatrixXd& x_centered);

// center_columns followed by pca, with column_means filled in.
PcaResult pca_of(const Eigen::MatrixXd& x);

// lambda_k / sum(lambda). Throws AllZeroVarianceError when the sum is zero.
std::vector<double> explained_variance(std::span<const double> eigenvalues);

// Smallest k whose cumulative proportion reaches threshold (1e-12 slack).
int num_pcs_for_variance(std::span<const double> proportions, double threshold);

}  // namespace simalign
