#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "simalign/distributions.hpp"
#include "simalign/errors.hpp"
#include "simalign/stattests.hpp"

namespace simalign {

namespace {

// log det of a symmetric positive definite matrix, or nullopt when the
// Cholesky factorization fails or a pivot is negligible.
std::optional<double> spd_log_det(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
    const double largest = m.diagonal().cwiseAbs().maxCoeff();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag(i) * diag(i) > 1e-12 * largest)) return std::nullopt;
        log_det += 2.0 * std::log(diag(i));
    }
    return log_det;
}

Eigen::MatrixXd scatter(const Eigen::MatrixXd& rows) {
    const Eigen::RowVectorXd mean = rows.colwise().mean();
    const Eigen::MatrixXd centered = rows.rowwise() - mean;
    return centered.transpose() * centered;
}

}  // namespace

TestResult manova(const Eigen::MatrixXd& data, std::span<const std::size_t> groups) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (d < 1) throw InsufficientDataError("MANOVA needs at least one dependent variable");
    if (static_cast<std::size_t>(n) != groups.size()) {
        throw LengthMismatchError("MANOVA: " + std::to_string(groups.size()) + " labels for " + std::to_string(n) +
                                  " rows");
    }
    const std::size_t s = groups.empty() ? 0 : *std::max_element(groups.begin(), groups.end()) + 1;
    std::vector<Eigen::Index> sizes(s, 0);
    for (auto g : groups) ++sizes[g];
    if (s < 2) throw InsufficientDataError("MANOVA needs at least 2 groups");
    for (std::size_t g = 0; g < s; ++g) {
        if (sizes[g] < 2) throw InsufficientDataError("MANOVA: group " + std::to_string(g) + " has fewer than 2 rows");
    }
    const Eigen::Index error_df = n - static_cast<Eigen::Index>(s);
    if (d >= error_df) {
        throw SingularScatterError("MANOVA: " + std::to_string(d) + " dimensions with only " +
                                   std::to_string(error_df) + " error degrees of freedom");
    }

    // Wilks' lambda is invariant to column scaling; standardizing keeps the
    // singularity check meaningful for columns of very different magnitude.
    const Eigen::RowVectorXd grand = data.colwise().mean();
    Eigen::MatrixXd x = data.rowwise() - grand;
    for (Eigen::Index c = 0; c < d; ++c) {
        const double norm = x.col(c).norm();
        if (!(norm > 0.0)) throw SingularScatterError("MANOVA: column " + std::to_string(c) + " is constant");
        x.col(c) /= norm;
    }

    Eigen::MatrixXd within = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t g = 0; g < s; ++g) {
        Eigen::MatrixXd block(sizes[g], d);
        Eigen::Index at = 0;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (groups[static_cast<std::size_t>(r)] == g) block.row(at++) = x.row(r);
        }
        within += scatter(block);
    }
    const Eigen::MatrixXd total = x.transpose() * x;

    const auto log_within = spd_log_det(within);
    const auto log_total = spd_log_det(total);
    if (!log_within || !log_total) throw SingularScatterError("MANOVA: within-group scatter matrix is singular");
    const double lambda = std::clamp(std::exp(*log_within - *log_total), 0.0, 1.0);

    // Rao's F approximation; exact when s = 2 or d = 1.
    const double p = static_cast<double>(d);
    const double q = static_cast<double>(s) - 1.0;
    const double t = (p * p + q * q - 5.0 > 0.0) ? std::sqrt((p * p * q * q - 4.0) / (p * p + q * q - 5.0)) : 1.0;
    const double df1 = p * q;
    const double w = static_cast<double>(error_df) + q - (p + q + 1.0) / 2.0;
    const double df2 = w * t - (p * q - 2.0) / 2.0;
    const double root = std::pow(lambda, 1.0 / t);

    TestResult r;
    r.method = TestMethod::manova_wilks;
    r.statistic = lambda;
    r.df = {df1, df2};
    if (root >= 1.0) {
        r.p_value = 1.0;
    } else if (root <= 0.0) {
        r.p_value = 0.0;
    } else {
        r.p_value = dist::f_sf((1.0 - root) / root * df2 / df1, df1, df2);
    }
    return r;
}

TestResult royston(const Eigen::MatrixXd& data) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (n < 4) throw InsufficientDataError("Royston test needs at least 4 observations");
    if (d < 2) throw InsufficientDataError("Royston test needs at least 2 variables");

    const double ln = std::log(static_cast<double>(n));
    std::vector<double> stretched(static_cast<std::size_t>(d));
    for (Eigen::Index c = 0; c < d; ++c) {
        const Eigen::VectorXd col = data.col(c);
        if (col.maxCoeff() == col.minCoeff()) {
            throw ZeroVarianceError("Royston test: column " + std::to_string(c) + " is constant");
        }
        const double w = shapiro_wilk(std::span<const double>(col.data(), static_cast<std::size_t>(n))).statistic;
        const double log1mw = std::log1p(-w);
        double z = 0.0;
        if (n <= 11) {
            const double x = static_cast<double>(n);
            const double g = -2.273 + 0.459 * x;
            const double m = 0.544 - 0.39978 * x + 0.025054 * x * x - 0.0006714 * x * x * x;
            const double s = std::exp(1.3822 - 0.77857 * x + 0.062767 * x * x - 0.0020322 * x * x * x);
            z = (g - log1mw > 0.0) ? (-std::log(g - log1mw) - m) / s : -dist::normal_quantile(1e-99);
        } else {
            const double m = -1.5861 - 0.31082 * ln - 0.083751 * ln * ln + 0.0038915 * ln * ln * ln;
            const double s = std::exp(-0.4803 - 0.082676 * ln + 0.0030302 * ln * ln);
            z = (log1mw - m) / s;
        }
        const double q = dist::normal_quantile(dist::normal_cdf(-z) / 2.0);
        stretched[static_cast<std::size_t>(c)] = q * q;
    }

    // Equivalent degrees of freedom from the correlation structure.
    const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered;
    const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    const double u = 0.715;
    const double v = 0.21364 + 0.015124 * ln * ln - 0.0018034 * ln * ln * ln;
    double total = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double corr = (i == j) ? 1.0 : std::clamp(cov(i, j) / (sd(i) * sd(j)), -1.0, 1.0);
            total += std::pow(corr, 5) * (1.0 - u * std::pow(1.0 - corr, u) / v);
        }
    }
    const double pd = static_cast<double>(d);
    const double mean_corr = (total - pd) / (pd * pd - pd);
    const double edf = pd / (1.0 + (pd - 1.0) * mean_corr);

    double sum = 0.0;
    for (double s : stretched) sum += s;

    TestResult r;
    r.method = TestMethod::royston;
    r.statistic = edf * sum / pd;
    r.df = {edf};
    r.p_value = dist::chi2_sf(r.statistic, edf);
    return r;
}

TestResult box_m(std::span<const Eigen::MatrixXd> groups) {
    if (groups.size() < 2) throw InsufficientDataError("Box's M needs at least 2 groups");
    const Eigen::Index d = groups.front().cols();
    if (d < 1) throw InsufficientDataError("Box's M needs at least one variable");

    double n_total = 0.0;
    double sum_log = 0.0;
    double sum_inv = 0.0;
    Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& block = groups[g];
        if (block.cols() != d) throw ShapeMismatchError("Box's M: groups have different dimensions");
        if (block.rows() <= d) {
            throw SingularCovarianceError("Box's M: group " + std::to_string(g) + " has " +
                                          std::to_string(block.rows()) + " rows for " + std::to_string(d) +
                                          " dimensions");
        }
        const double dof = static_cast<double>(block.rows()) - 1.0;
        const Eigen::MatrixXd s = scatter(block);
        const auto log_det = spd_log_det(s / dof);
        if (!log_det) throw SingularCovarianceError("Box's M: covariance of group " + std::to_string(g) + " is singular");
        pooled += s;
        sum_log += dof * *log_det;
        sum_inv += 1.0 / dof;
        n_total += static_cast<double>(block.rows());
    }
    const double k = static_cast<double>(groups.size());
    const double dof_total = n_total - k;
    const auto log_pooled = spd_log_det(pooled / dof_total);
    if (!log_pooled) throw SingularCovarianceError("Box's M: pooled covariance is singular");

    const double m = dof_total * *log_pooled - sum_log;
    const double p = static_cast<double>(d);
    const double c = (sum_inv - 1.0 / dof_total) * (2.0 * p * p + 3.0 * p - 1.0) / (6.0 * (p + 1.0) * (k - 1.0));
    const double df = p * (p + 1.0) * (k - 1.0) / 2.0;

    TestResult r;
    r.method = TestMethod::box_m;
    r.note = "chi-square approximation";
    r.statistic = std::max(m * (1.0 - c), 0.0);
    r.df = {df};
    r.p_value = dist::chi2_sf(r.statistic, df);
    return r;
}

}  // namespace simalign
