#pragma once

#include <cstddef>
#include <utility>

namespace simalign::dist {

// Upper-tail probabilities. All return values are clamped to [0, 1].
double normal_sf(double z);
double normal_cdf(double z);
double normal_quantile(double p);
double t_sf(double t, double df);
double f_sf(double f, double df1, double df2);
double chi2_sf(double x, double df);
// Survival function of the limiting Kolmogorov distribution.
double kolmogorov_sf(double lambda);

// Two-sided central interval [lo, hi] of Binomial(n, p) holding at least
// `level` probability: lo is the (1-level)/2 quantile, hi the (1+level)/2.
std::pair<std::size_t, std::size_t> binomial_envelope(std::size_t n, double p, double level);

}  // namespace simalign::dist
