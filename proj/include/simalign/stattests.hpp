#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "simalign/outputdata.hpp"

namespace simalign {

enum class TestMethod {
    t_test,
    welch_t_test,
    mann_whitney,
    kolmogorov_smirnov,
    anova,
    kruskal_wallis,
    manova_wilks,
    shapiro_wilk,
    royston,
    bartlett,
    box_m,
};

std::string_view to_string(TestMethod method);
TestMethod test_method_from_string(std::string_view name);

// Notes attached to results computed through a special path.
inline constexpr std::string_view kNoteAllEqual = "all-values-equal shortcut";
inline constexpr std::string_view kNoteExact = "exact enumeration";
inline constexpr std::string_view kNoteNormalApprox = "normal approximation";

struct TestResult {
    TestMethod method = TestMethod::t_test;
    double statistic = 0.0;
    double p_value = 1.0;
    std::vector<double> df;  // empty, one or two entries
    std::string note;

    friend bool operator==(const TestResult&, const TestResult&) = default;
};

enum class TTestVariant { pooled, welch };

// Two-sided two-sample t-test (pooled variance by default).
TestResult t_test(std::span<const double> x, std::span<const double> y,
                  TTestVariant variant = TTestVariant::pooled);

// Two-sided Mann-Whitney U; the statistic is U for x. Exact for tie-free
// samples with both sizes <= kMannWhitneyExactLimit.
inline constexpr std::size_t kMannWhitneyExactLimit = 8;
TestResult mann_whitney(std::span<const double> x, std::span<const double> y);

// Two-sample Kolmogorov-Smirnov with the asymptotic p-value.
TestResult ks_test(std::span<const double> x, std::span<const double> y);

TestResult anova(std::span<const std::vector<double>> groups);
TestResult kruskal_wallis(std::span<const std::vector<double>> groups);

// One-way MANOVA with Wilks' lambda and Rao's F approximation. `groups`
// holds the group index of every row of `data`.
TestResult manova(const Eigen::MatrixXd& data, std::span<const std::size_t> groups);

// Shapiro-Wilk W with the AS R94 p-value, 3 <= n <= 5000.
TestResult shapiro_wilk(std::span<const double> x);

// Royston's multivariate normality H test (columns are variables).
TestResult royston(const Eigen::MatrixXd& data);

TestResult bartlett(std::span<const std::vector<double>> groups);

// Box's M test of equal covariance matrices with the chi-square approximation.
TestResult box_m(std::span<const Eigen::MatrixXd> groups);

// none, bonferroni (min(1, k p)), holm (step-down) or weighted Bonferroni
// (min(1, p_i * sum(w) / w_i)); weights are only used by `weighted`.
std::vector<double> adjust_pvalues(std::span<const double> p, AdjustMethod method,
                                   std::span<const double> weights = {});

}  // namespace simalign
