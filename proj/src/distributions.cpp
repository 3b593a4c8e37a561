#include "simalign/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace simalign::dist {

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

double normal_sf(double z) {
    if (std::isnan(z)) return 1.0;
    if (std::isinf(z)) return z > 0 ? 0.0 : 1.0;
    return clamp01(boost::math::cdf(boost::math::complement(boost::math::normal_distribution<>(), z)));
}

double normal_cdf(double z) { return normal_sf(-z); }

double normal_quantile(double p) {
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    return boost::math::quantile(boost::math::normal_distribution<>(), p);
}

double t_sf(double t, double df) {
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    return clamp01(boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<>(df), t)));
}

double f_sf(double f, double df1, double df2) {
    if (!(f > 0.0)) return 1.0;
    if (std::isinf(f)) return 0.0;
    return clamp01(boost::math::cdf(boost::math::complement(boost::math::fisher_f_distribution<>(df1, df2), f)));
}

double chi2_sf(double x, double df) {
    if (!(x > 0.0)) return 1.0;
    if (std::isinf(x)) return 0.0;
    // Q(df/2, x/2) directly, which stays accurate far into the tail.
    return clamp01(boost::math::gamma_q(df / 2.0, x / 2.0));
}

double kolmogorov_sf(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    // 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2); for small lambda use the
    // theta-function form 1 - sqrt(2 pi)/lambda * sum exp(-(2k-1)^2 pi^2 / (8 lambda^2)).
    constexpr double pi = 3.14159265358979323846;
    if (lambda < 1.18) {
        const double y = -pi * pi / (8.0 * lambda * lambda);
        double sum = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double term = std::exp(static_cast<double>((2 * k - 1) * (2 * k - 1)) * y);
            sum += term;
            if (term < 1e-18 * sum) break;
        }
        return clamp01(1.0 - std::sqrt(2.0 * pi) / lambda * sum);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return clamp01(2.0 * sum);
}

std::pair<std::size_t, std::size_t> binomial_envelope(std::size_t n, double p, double level) {
    const double lower_tail = (1.0 - level) / 2.0;
    const double upper_tail = (1.0 + level) / 2.0;
    std::size_t lo = n;
    std::size_t hi = n;
    bool have_lo = false;
    double cdf = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double log_pmf = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                               std::lgamma(static_cast<double>(n - k) + 1.0) +
                               (k > 0 ? static_cast<double>(k) * std::log(p) : 0.0) +
                               (n - k > 0 ? static_cast<double>(n - k) * std::log1p(-p) : 0.0);
        cdf += std::exp(log_pmf);
        if (!have_lo && cdf >= lower_tail) {
            lo = k;
            have_lo = true;
        }
        if (cdf >= upper_tail) {
            hi = k;
            break;
        }
    }
    return {lo, hi};
}

}  // namespace simalign::dist
