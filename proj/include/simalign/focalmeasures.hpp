#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simalign/comparator.hpp"
#include "simalign/outputdata.hpp"
#include "simalign/stattests.hpp"

namespace simalign {

enum class FocalMeasure { max, argmax, min, argmin, ss_mean, ss_std };

inline constexpr std::array<FocalMeasure, 6> kFocalMeasures = {FocalMeasure::max,    FocalMeasure::argmax,
                                                               FocalMeasure::min,    FocalMeasure::argmin,
                                                               FocalMeasure::ss_mean, FocalMeasure::ss_std};

std::string_view to_string(FocalMeasure fm);
FocalMeasure focal_measure_from_string(std::string_view name);

struct FocalMeasureRecord {
    std::string group;
    double max = 0.0;
    int argmax = 0;  // first iteration attaining the maximum
    double min = 0.0;
    int argmin = 0;
    double ss_mean = 0.0;  // over iterations i > l
    double ss_std = 0.0;   // sample standard deviation, same slice

    double value(FocalMeasure fm) const;

    friend bool operator==(const FocalMeasureRecord&, const FocalMeasureRecord&) = default;
};

struct FocalMeasureTable {
    std::string output_name;
    int truncation = 0;
    std::vector<std::string> groups;  // group order
    std::vector<FocalMeasureRecord> records;  // one per replication, matrix row order

    friend bool operator==(const FocalMeasureTable&, const FocalMeasureTable&) = default;
};

// Requires 0 <= l <= m - 2 so the steady-state slice holds two points;
// throws TruncationError otherwise.
FocalMeasureTable extract_fms(const OutputMatrix& out, int truncation);

struct FocalMeasureTest {
    FocalMeasure measure = FocalMeasure::max;
    TestResult test;  // t-test / ANOVA, or Mann-Whitney / Kruskal-Wallis for argmax and argmin
    std::vector<OptionalTest> shapiro;  // per group, advisory only
    OptionalTest bartlett;              // advisory only

    friend bool operator==(const FocalMeasureTest&, const FocalMeasureTest&) = default;
};

struct FocalMeasureComparison {
    std::string output_name;
    std::vector<FocalMeasureTest> tests;  // kFocalMeasures order

    friend bool operator==(const FocalMeasureComparison&, const FocalMeasureComparison&) = default;
};

// p-values are reported unadjusted; about alpha of them are expected below
// alpha when the groups are equivalent.
FocalMeasureComparison compare_fms(const FocalMeasureTable& table, double alpha,
                                   TTestVariant variant = TTestVariant::pooled);

struct FocalMeasureReport {
    double alpha = 0.05;
    int truncation = 0;
    std::vector<FocalMeasureComparison> outputs;
    Verdict verdict = Verdict::aligned;
    std::size_t significant = 0;       // raw p < alpha over the whole grid
    std::size_t tests = 0;
    std::size_t envelope_high = 0;     // binomial 99% upper bound for `significant`
    std::vector<std::string> evidence;

    friend bool operator==(const FocalMeasureReport&, const FocalMeasureReport&) = default;
};

// Misaligned when any Bonferroni-adjusted p (over the whole grid) is below
// alpha, inconclusive when only the raw count exceeds its binomial bound.
FocalMeasureReport compare_fm_outputs(std::span<const OutputMatrix> outputs, int truncation, double alpha,
                                      TTestVariant variant = TTestVariant::pooled);

// CSV with header group,replication,max,argmax,min,argmin,ss_mean,ss_std.
// Replications are numbered from 1 within each group.
std::string render_fm_csv(const FocalMeasureTable& table);
void write_fm_csv(const std::filesystem::path& path, const FocalMeasureTable& table);

}  // namespace simalign
