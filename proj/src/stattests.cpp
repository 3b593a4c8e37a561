#include "simalign/stattests.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "simalign/distributions.hpp"
#include "simalign/errors.hpp"
#include "stats_detail.hpp"

namespace simalign {

namespace {

constexpr std::pair<TestMethod, std::string_view> kMethodNames[] = {
    {TestMethod::t_test, "t_test"},
    {TestMethod::welch_t_test, "welch_t_test"},
    {TestMethod::mann_whitney, "mann_whitney"},
    {TestMethod::kolmogorov_smirnov, "kolmogorov_smirnov"},
    {TestMethod::anova, "anova"},
    {TestMethod::kruskal_wallis, "kruskal_wallis"},
    {TestMethod::manova_wilks, "manova_wilks"},
    {TestMethod::shapiro_wilk, "shapiro_wilk"},
    {TestMethod::royston, "royston"},
    {TestMethod::bartlett, "bartlett"},
    {TestMethod::box_m, "box_m"},
};

bool all_values_equal(std::span<const std::span<const double>> samples) {
    const double* first = nullptr;
    for (const auto& s : samples) {
        for (const double& v : s) {
            if (!first) first = &v;
            else if (v != *first) return false;
        }
    }
    return true;
}

}  // namespace

std::string_view to_string(TestMethod method) {
    for (const auto& [m, name] : kMethodNames) {
        if (m == method) return name;
    }
    return "unknown";
}

TestMethod test_method_from_string(std::string_view name) {
    for (const auto& [m, n] : kMethodNames) {
        if (n == name) return m;
    }
    throw ParseError("unknown test method '" + std::string(name) + "'");
}

namespace detail {

double mean(std::span<const double> x) {
    double sum = 0.0;
    for (double v : x) sum += v;
    return sum / static_cast<double>(x.size());
}

double sum_sq_dev(std::span<const double> x, double m) {
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss;
}

double variance(std::span<const double> x) {
    return sum_sq_dev(x, mean(x)) / static_cast<double>(x.size() - 1);
}

PooledRanks pooled_ranks(std::span<const std::span<const double>> samples) {
    std::vector<std::pair<double, std::size_t>> pooled;
    for (std::size_t g = 0; g < samples.size(); ++g) {
        for (double v : samples[g]) pooled.emplace_back(v, g);
    }
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pooled[a].first < pooled[b].first; });

    PooledRanks out;
    out.rank_sums.assign(samples.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && pooled[order[j + 1]].first == pooled[order[i]].first) ++j;
        const double tie = static_cast<double>(j - i + 1);
        const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) out.rank_sums[pooled[order[k]].second] += rank;
        if (tie > 1.0) {
            out.tie_term += tie * tie * tie - tie;
            out.has_ties = true;
        }
        i = j + 1;
    }
    return out;
}

}  // namespace detail

using detail::mean;
using detail::sum_sq_dev;

TestResult t_test(std::span<const double> x, std::span<const double> y, TTestVariant variant) {
    if (x.size() < 2 || y.size() < 2) {
        throw InsufficientDataError("t-test needs at least 2 values per sample");
    }
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    const double mx = mean(x);
    const double my = mean(y);
    const double vx = sum_sq_dev(x, mx) / (nx - 1.0);
    const double vy = sum_sq_dev(y, my) / (ny - 1.0);

    TestResult r;
    double se = 0.0;
    double df = 0.0;
    if (variant == TTestVariant::pooled) {
        r.method = TestMethod::t_test;
        df = nx + ny - 2.0;
        const double pooled = ((nx - 1.0) * vx + (ny - 1.0) * vy) / df;
        if (!(pooled > 0.0)) throw ZeroVarianceError("t-test: pooled variance is zero");
        se = std::sqrt(pooled * (1.0 / nx + 1.0 / ny));
    } else {
        r.method = TestMethod::welch_t_test;
        const double ax = vx / nx;
        const double ay = vy / ny;
        if (!(ax + ay > 0.0)) throw ZeroVarianceError("Welch t-test: both samples are constant");
        se = std::sqrt(ax + ay);
        df = (ax + ay) * (ax + ay) / (ax * ax / (nx - 1.0) + ay * ay / (ny - 1.0));
    }
    r.statistic = (mx - my) / se;
    r.df = {df};
    r.p_value = std::min(1.0, 2.0 * dist::t_sf(std::abs(r.statistic), df));
    return r;
}

namespace {

// Number of labelings of sizes (m, n) with U = u, for u in [0, m n].
std::vector<double> mann_whitney_counts(std::size_t m, std::size_t n) {
    // counts[i][j] is the distribution for sizes (i, j); built bottom-up.
    std::vector<std::vector<std::vector<double>>> counts(m + 1, std::vector<std::vector<double>>(n + 1));
    for (std::size_t i = 0; i <= m; ++i) {
        for (std::size_t j = 0; j <= n; ++j) {
            auto& hist = counts[i][j];
            hist.assign(i * j + 1, 0.0);
            if (i == 0 || j == 0) {
                hist[0] = 1.0;
                continue;
            }
            // Largest pooled value belongs to x (adds j to U) or to y.
            const auto& from_x = counts[i - 1][j];
            const auto& from_y = counts[i][j - 1];
            for (std::size_t u = 0; u < from_x.size(); ++u) hist[u + j] += from_x[u];
            for (std::size_t u = 0; u < from_y.size(); ++u) hist[u] += from_y[u];
        }
    }
    return counts[m][n];
}

}  // namespace

TestResult mann_whitney(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw InsufficientDataError("Mann-Whitney needs non-empty samples");
    const double n1 = static_cast<double>(x.size());
    const double n2 = static_cast<double>(y.size());

    TestResult r;
    r.method = TestMethod::mann_whitney;
    const std::span<const double> samples[] = {x, y};
    if (all_values_equal(samples)) {
        r.statistic = n1 * n2 / 2.0;
        r.p_value = 1.0;
        r.note = kNoteAllEqual;
        return r;
    }

    const auto ranks = detail::pooled_ranks(samples);
    const double u = ranks.rank_sums[0] - n1 * (n1 + 1.0) / 2.0;
    r.statistic = u;

    if (!ranks.has_ties && x.size() <= kMannWhitneyExactLimit && y.size() <= kMannWhitneyExactLimit) {
        const auto counts = mann_whitney_counts(x.size(), y.size());
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        const auto observed = static_cast<std::size_t>(std::llround(u));
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (k <= observed) lower += counts[k];
            if (k >= observed) upper += counts[k];
        }
        r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / total);
        r.note = kNoteExact;
        return r;
    }

    const double n = n1 + n2;
    const double mu = n1 * n2 / 2.0;
    const double sigma2 = n1 * n2 / 12.0 * ((n + 1.0) - ranks.tie_term / (n * (n - 1.0)));
    const double z = std::max(std::abs(u - mu) - 0.5, 0.0) / std::sqrt(sigma2);
    r.p_value = std::min(1.0, 2.0 * dist::normal_sf(z));
    r.note = kNoteNormalApprox;
    return r;
}

TestResult ks_test(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw InsufficientDataError("Kolmogorov-Smirnov needs non-empty samples");
    std::vector<double> a(x.begin(), x.end());
    std::vector<double> b(y.begin(), y.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());

    double d = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }

    TestResult r;
    r.method = TestMethod::kolmogorov_smirnov;
    r.statistic = d;
    r.p_value = dist::kolmogorov_sf(std::sqrt(na * nb / (na + nb)) * d);
    return r;
}

TestResult anova(std::span<const std::vector<double>> groups) {
    if (groups.size() < 2) throw InsufficientDataError("ANOVA needs at least 2 groups");
    double n_total = 0.0;
    double grand = 0.0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw InsufficientDataError("ANOVA needs at least 2 values per group");
        n_total += static_cast<double>(g.size());
        for (double v : g) grand += v;
    }
    grand /= n_total;
    double ss_between = 0.0;
    double ss_within = 0.0;
    for (const auto& g : groups) {
        const double m = mean(g);
        ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        ss_within += sum_sq_dev(g, m);
    }
    if (!(ss_within > 0.0)) throw ZeroVarianceError("ANOVA: within-group variance is zero");
    const double df1 = static_cast<double>(groups.size()) - 1.0;
    const double df2 = n_total - static_cast<double>(groups.size());

    TestResult r;
    r.method = TestMethod::anova;
    r.statistic = (ss_between / df1) / (ss_within / df2);
    r.df = {df1, df2};
    r.p_value = dist::f_sf(r.statistic, df1, df2);
    return r;
}

TestResult kruskal_wallis(std::span<const std::vector<double>> groups) {
    if (groups.size() < 2) throw InsufficientDataError("Kruskal-Wallis needs at least 2 groups");
    std::vector<std::span<const double>> samples;
    double n = 0.0;
    for (const auto& g : groups) {
        if (g.empty()) throw InsufficientDataError("Kruskal-Wallis: empty group");
        samples.emplace_back(g);
        n += static_cast<double>(g.size());
    }
    if (n < 3.0) throw InsufficientDataError("Kruskal-Wallis needs at least 3 values in total");

    TestResult r;
    r.method = TestMethod::kruskal_wallis;
    r.df = {static_cast<double>(groups.size()) - 1.0};
    if (all_values_equal(samples)) {
        r.statistic = 0.0;
        r.p_value = 1.0;
        r.note = kNoteAllEqual;
        return r;
    }
    const auto ranks = detail::pooled_ranks(samples);
    double h = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        h += ranks.rank_sums[g] * ranks.rank_sums[g] / static_cast<double>(groups[g].size());
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
    h /= 1.0 - ranks.tie_term / (n * n * n - n);
    r.statistic = std::max(h, 0.0);
    r.p_value = dist::chi2_sf(r.statistic, r.df[0]);
    return r;
}

TestResult bartlett(std::span<const std::vector<double>> groups) {
    if (groups.size() < 2) throw InsufficientDataError("Bartlett test needs at least 2 groups");
    double n_total = 0.0;
    double pooled_num = 0.0;
    double sum_log = 0.0;
    double sum_inv = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& values = groups[g];
        if (values.size() < 2) throw InsufficientDataError("Bartlett test needs at least 2 values per group");
        const double dof = static_cast<double>(values.size()) - 1.0;
        const double v = detail::variance(values);
        if (!(v > 0.0)) throw ZeroVarianceError("Bartlett test: group " + std::to_string(g) + " has zero variance");
        n_total += static_cast<double>(values.size());
        pooled_num += dof * v;
        sum_log += dof * std::log(v);
        sum_inv += 1.0 / dof;
    }
    const double k = static_cast<double>(groups.size());
    const double dof_total = n_total - k;
    const double pooled = pooled_num / dof_total;
    const double numerator = dof_total * std::log(pooled) - sum_log;
    const double correction = 1.0 + (sum_inv - 1.0 / dof_total) / (3.0 * (k - 1.0));

    TestResult r;
    r.method = TestMethod::bartlett;
    r.statistic = std::max(numerator / correction, 0.0);
    r.df = {k - 1.0};
    r.p_value = dist::chi2_sf(r.statistic, k - 1.0);
    return r;
}

std::vector<double> adjust_pvalues(std::span<const double> p, AdjustMethod method, std::span<const double> weights) {
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("p-value outside [0,1]: " + std::to_string(v));
    }
    const double k = static_cast<double>(p.size());
    std::vector<double> out(p.begin(), p.end());

    if (method == AdjustMethod::weighted) {
        if (weights.size() != p.size()) {
            throw LengthMismatchError("weighted adjustment: " + std::to_string(weights.size()) + " weights for " +
                                      std::to_string(p.size()) + " p-values");
        }
        double total = 0.0;
        bool equal = true;
        for (double w : weights) {
            if (!(w > 0.0)) throw NonPositiveWeightError("weights must be positive, got " + std::to_string(w));
            total += w;
            equal = equal && w == weights.front();
        }
        // Equal weights are plain Bonferroni; taking that path keeps the ratio exactly k.
        if (!equal) {
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(1.0, p[i] * total / weights[i]);
            return out;
        }
        method = AdjustMethod::bonferroni;
    }

    switch (method) {
        case AdjustMethod::none:
            break;
        case AdjustMethod::bonferroni:
            for (auto& v : out) v = std::min(1.0, k * v);
            break;
        case AdjustMethod::holm: {
            std::vector<std::size_t> order(p.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
            double running = 0.0;
            for (std::size_t rank = 0; rank < order.size(); ++rank) {
                const double adjusted = std::min(1.0, (k - static_cast<double>(rank)) * p[order[rank]]);
                running = std::max(running, adjusted);
                out[order[rank]] = running;
            }
            break;
        }
        case AdjustMethod::weighted:
            break;
    }
    return out;
}

}  // namespace simalign
