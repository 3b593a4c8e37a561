#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simalign/outputdata.hpp"
#include "simalign/stattests.hpp"

namespace simalign {

// Fixed variance thresholds whose #PCs are always reported.
inline constexpr double kVarianceLadder[] = {0.3, 0.5, 0.7, 0.9};

inline constexpr std::string_view kReasonSinglePc = "single-pc";
inline constexpr std::string_view kReasonSingularScatter = "singular-scatter";

struct CompareOptions {
    double variance = 0.9;
    double alpha = 0.05;
    AdjustMethod adjust = AdjustMethod::weighted;
    TTestVariant t_variant = TTestVariant::pooled;
    bool nonparametric = false;   // base the verdict on the rank tests
    double culprit_floor = 0.01;  // explained variance a MANOVA culprit PC needs to count

    static CompareOptions from(const ComparisonOptions& options);
    // Throws ValidationError.
    void validate() const;

    friend bool operator==(const CompareOptions&, const CompareOptions&) = default;
};

// A test that may not apply; `reason` says why when `result` is empty.
struct OptionalTest {
    std::optional<TestResult> result;
    std::string reason;

    std::optional<double> p() const { return result ? std::optional<double>(result->p_value) : std::nullopt; }

    friend bool operator==(const OptionalTest&, const OptionalTest&) = default;
};

struct Assumptions {
    std::vector<std::vector<OptionalTest>> shapiro;  // [pc][group]
    std::vector<OptionalTest> bartlett;              // [pc]
    std::vector<OptionalTest> royston;               // [group], over the MANOVA subspace
    OptionalTest box_m;                              // over the MANOVA subspace

    friend bool operator==(const Assumptions&, const Assumptions&) = default;
};

struct ScatterPoint {
    double pc1 = 0.0;
    double pc2 = 0.0;
    std::string group;

    friend bool operator==(const ScatterPoint&, const ScatterPoint&) = default;
};

struct OutputComparison {
    std::string output_name;
    std::vector<std::string> groups;
    std::vector<double> eigenvalues;  // the u numerically non-zero ones
    std::vector<double> explained;
    std::map<double, int> npcs_at;    // ladder plus the requested threshold
    double threshold = 0.9;
    std::vector<TestResult> parametric;     // per PC: t-test, or ANOVA for > 2 groups
    std::vector<TestResult> nonparametric;  // per PC: Mann-Whitney, or Kruskal-Wallis
    AdjustMethod adjust = AdjustMethod::weighted;
    std::vector<double> adjusted_p;               // parametric track
    std::vector<double> adjusted_nonparametric_p;
    OptionalTest manova;  // over the first npcs_at[threshold] PCs
    Assumptions assumptions;
    std::vector<ScatterPoint> scatter;  // one per replication

    int npcs() const { return npcs_at.at(threshold); }
    std::vector<double> parametric_p() const;
    std::vector<double> nonparametric_p() const;

    friend bool operator==(const OutputComparison&, const OutputComparison&) = default;
};

enum class Verdict { aligned, misaligned, inconclusive };

std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view name);

struct Culprit {
    int pc = 0;  // 1-based
    double p_value = 1.0;
    double explained = 0.0;

    friend bool operator==(const Culprit&, const Culprit&) = default;
};

struct OutputVerdict {
    std::string output_name;
    Verdict verdict = Verdict::aligned;
    std::vector<std::string> evidence;
    std::vector<Culprit> culprits;
    std::size_t significant = 0;     // unadjusted p < alpha on the verdict track
    std::size_t envelope_high = 0;   // binomial 99% upper bound for that count

    friend bool operator==(const OutputVerdict&, const OutputVerdict&) = default;
};

struct AlignmentSummary {
    double alpha = 0.05;
    std::vector<OutputVerdict> outputs;  // declared outputs, then A~
    Verdict overall = Verdict::aligned;
    std::vector<std::string> notes;

    friend bool operator==(const AlignmentSummary&, const AlignmentSummary&) = default;
};

struct ModelComparison {
    std::vector<OutputComparison> per_output;
    OutputComparison concatenated;
    ComparisonSpec spec_echo;
    CompareOptions options;
    AlignmentSummary summary;

    friend bool operator==(const ModelComparison&, const ModelComparison&) = default;
};

OutputComparison compare_output(const OutputMatrix& out, const CompareOptions& options);
OutputComparison compare_output(const OutputMatrix& out, double variance, double alpha);

// Compares already loaded outputs, plus their range-scaled concatenation.
ModelComparison compare_outputs(std::span<const OutputMatrix> outputs, const CompareOptions& options);

// Loads every output of the manifest and compares it.
ModelComparison compare_model(const ComparisonSpec& spec, const CompareOptions& options);
ModelComparison compare_model(const ComparisonSpec& spec);

OutputVerdict judge_output(const OutputComparison& oc, const CompareOptions& options);
AlignmentSummary summarize(const ModelComparison& mc, const CompareOptions& options);
AlignmentSummary summarize(const ModelComparison& mc, double alpha);

}  // namespace simalign
