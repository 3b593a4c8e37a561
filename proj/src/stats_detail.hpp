#pragma once

#include <span>
#include <vector>

namespace simalign::detail {

double mean(std::span<const double> x);
double sum_sq_dev(std::span<const double> x, double mean);
// Sample variance, denominator n - 1.
double variance(std::span<const double> x);

struct PooledRanks {
    std::vector<double> rank_sums;  // per sample, midranks for ties
    double tie_term = 0.0;          // sum of t^3 - t over tie blocks
    bool has_ties = false;
};

PooledRanks pooled_ranks(std::span<const std::span<const double>> samples);

}  // namespace simalign::detail
