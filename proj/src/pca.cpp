#include "simalign/pca.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "simalign/errors.hpp"

namespace simalign {

CenteredMatrix center_columns(const Eigen::MatrixXd& x) {
    if (x.rows() == 0 || x.cols() == 0) throw InsufficientDataError("cannot center an empty matrix");
    CenteredMatrix out;
    out.means = x.colwise().mean().transpose();
    out.centered = x.rowwise() - out.means.transpose();
    return out;
}

PcaResult pca(const Eigen::MatrixXd& x_centered) {
    const Eigen::Index rows = x_centered.rows();
    const Eigen::Index cols = x_centered.cols();
    if (rows < 2) throw InsufficientDataError("PCA needs at least 2 rows, got " + std::to_string(rows));
    if (cols < 1) throw InsufficientDataError("PCA needs at least 1 column");
    if (!x_centered.allFinite()) throw NumericalError("PCA input contains non-finite values");

    const Eigen::Index u = std::min(rows - 1, cols);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(x_centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("singular value decomposition did not converge");

    PcaResult result;
    const Eigen::VectorXd singular = svd.singularValues().head(u);
    result.eigenvalues = singular.array().square() / static_cast<double>(rows - 1);
    result.loadings = svd.matrixV().leftCols(u);
    result.column_means = Eigen::VectorXd::Zero(cols);

    for (Eigen::Index k = 0; k < u; ++k) {
        auto column = result.loadings.col(k);
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < column.size(); ++i) {
            if (std::abs(column(i)) > best) {
                best = std::abs(column(i));
                pivot = i;
            }
        }
        if (column(pivot) < 0.0) column = -column;
    }
    // Projection rather than U*S keeps scores consistent with the flipped loadings.
    result.scores = x_centered * result.loadings;
    for (Eigen::Index k = 0; k < u; ++k) {
        if (result.eigenvalues(k) < 0.0) result.eigenvalues(k) = 0.0;
    }
    return result;
}

PcaResult pca_of(const Eigen::MatrixXd& x) {
    auto centered = center_columns(x);
    auto result = pca(centered.centered);
    result.column_means = std::move(centered.means);
    return result;
}

std::vector<double> explained_variance(std::span<const double> eigenvalues) {
    double total = 0.0;
    for (double v : eigenvalues) {
        if (v < 0.0) throw NumericalError("negative eigenvalue " + std::to_string(v));
        total += v;
    }
    if (!(total > 0.0)) throw AllZeroVarianceError("all eigenvalues are zero");
    std::vector<double> out;
    out.reserve(eigenvalues.size());
    for (double v : eigenvalues) out.push_back(v / total);
    return out;
}

int num_pcs_for_variance(std::span<const double> proportions, double threshold) {
    double cumulative = 0.0;
    for (std::size_t k = 0; k < proportions.size(); ++k) {
        cumulative += proportions[k];
        if (cumulative >= threshold - 1e-12) return static_cast<int>(k + 1);
    }
    return static_cast<int>(proportions.size());
}

}  // namespace simalign
