// Shapiro-Wilk W test, following Royston's algorithm AS R94 (1995).

#include <algorithm>
#include <cmath>
#include <vector>

#include "simalign/distributions.hpp"
#include "simalign/errors.hpp"
#include "simalign/stattests.hpp"

namespace simalign {

namespace {

// cc[0] + cc[1] x + ... + cc[n-1] x^(n-1)
template <std::size_t N>
double poly(const double (&cc)[N], double x) {
    double result = 0.0;
    for (std::size_t i = N; i-- > 0;) result = result * x + cc[i];
    return result;
}

constexpr double kG[] = {-2.273, 0.459};
constexpr double kC1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
constexpr double kC2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr double kC3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
constexpr double kC4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
constexpr double kC5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr double kC6[] = {-0.4803, -0.082676, 0.0030302};

// Coefficients for the sorted sample, antisymmetric around the middle.
std::vector<double> sw_coefficients(std::size_t n) {
    const std::size_t half = n / 2;
    std::vector<double> a(half + 1, 0.0);  // 1-based, a[1] pairs with the extremes
    const double an = static_cast<double>(n);
    if (n == 3) {
        a[1] = std::sqrt(0.5);
    } else {
        const double an25 = an + 0.25;
        double summ2 = 0.0;
        for (std::size_t i = 1; i <= half; ++i) {
            a[i] = dist::normal_quantile((static_cast<double>(i) - 0.375) / an25);
            summ2 += a[i] * a[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(kC1, rsn) - a[1] / ssumm2;

        std::size_t first_scaled = 0;
        double fac = 0.0;
        if (n > 5) {
            first_scaled = 3;
            const double a2 = -a[2] / ssumm2 + poly(kC2, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[2] = a2;
        } else {
            first_scaled = 2;
            fac = std::sqrt((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1));
        }
        a[1] = a1;
        for (std::size_t i = first_scaled; i <= half; ++i) a[i] /= -fac;
    }

    std::vector<double> full(n, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        full[i] = -a[i + 1];
        full[n - 1 - i] = a[i + 1];
    }
    return full;
}

}  // namespace

TestResult shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3) throw InsufficientDataError("Shapiro-Wilk needs at least 3 values, got " + std::to_string(n));
    if (n > 5000) throw ValidationError("Shapiro-Wilk supports at most 5000 values, got " + std::to_string(n));

    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 1e-19 * std::max(1.0, std::abs(x.back())))) {
        throw ZeroVarianceError("Shapiro-Wilk: sample is constant");
    }

    const auto coef = sw_coefficients(n);
    double mean_x = 0.0;
    for (auto& v : x) {
        v /= range;
        mean_x += v;
    }
    mean_x /= static_cast<double>(n);
    double ssa = 0.0;
    double ssx = 0.0;
    double sax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mean_x;
        ssa += coef[i] * coef[i];
        ssx += dx * dx;
        sax += coef[i] * dx;
    }
    // 1 - W, computed so that W close to 1 keeps its precision.
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);

    TestResult r;
    r.method = TestMethod::shapiro_wilk;
    r.statistic = 1.0 - w1;

    const double an = static_cast<double>(n);
    if (n == 3) {
        constexpr double pi6 = 1.90985931710274;   // 6 / pi
        constexpr double stqr = 1.04719755119660;  // asin(sqrt(3/4))
        r.p_value = std::clamp(pi6 * (std::asin(std::sqrt(r.statistic)) - stqr), 0.0, 1.0);
        return r;
    }

    double y = std::log(w1);
    double m = 0.0;
    double s = 0.0;
    if (n <= 11) {
        const double gamma = poly(kG, an);
        if (y >= gamma) {
            r.p_value = 1e-99;
            return r;
        }
        y = -std::log(gamma - y);
        m = poly(kC3, an);
        s = std::exp(poly(kC4, an));
    } else {
        const double ln = std::log(an);
        m = poly(kC5, ln);
        s = std::exp(poly(kC6, ln));
    }
    r.p_value = dist::normal_sf((y - m) / s);
    return r;
}

}  // namespace simalign
