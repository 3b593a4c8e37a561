#include "simalign/comparator.hpp"

#include <algorithm>
#include <cstdio>

#include "group_tests.hpp"
#include "simalign/distributions.hpp"
#include "simalign/errors.hpp"
#include "simalign/parallel.hpp"
#include "simalign/pca.hpp"

namespace simalign {

namespace {

// Eigenvalues below this fraction of the largest are rounding noise from a
// rank-deficient matrix; their scores carry no information to test.
constexpr double kRankTolerance = 1e-12;

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, value);
    return buf;
}

std::string pc_label(std::size_t k) { return "PC" + std::to_string(k + 1); }

std::vector<double> p_values(const std::vector<TestResult>& results) {
    std::vector<double> out;
    out.reserve(results.size());
    for (const auto& r : results) out.push_back(r.p_value);
    return out;
}

template <class F>
OptionalTest attempt(F&& f) {
    OptionalTest t;
    try {
        t.result = f();
    } catch (const Error& e) {
        t.reason = e.what();
    }
    return t;
}

std::vector<double> adjust(const std::vector<double>& p, AdjustMethod method, const std::vector<double>& explained) {
    if (method == AdjustMethod::weighted) return adjust_pvalues(p, method, explained);
    return adjust_pvalues(p, method);
}

}  // namespace

CompareOptions CompareOptions::from(const ComparisonOptions& options) {
    CompareOptions o;
    o.variance = options.variance;
    o.alpha = options.alpha;
    o.adjust = options.adjust;
    return o;
}

void CompareOptions::validate() const {
    if (!(variance > 0.0 && variance <= 1.0)) {
        throw ValidationError("variance threshold must be in (0,1], got " + std::to_string(variance));
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0,1), got " + std::to_string(alpha));
    if (!(culprit_floor >= 0.0 && culprit_floor <= 1.0)) {
        throw ValidationError("culprit floor must be in [0,1], got " + std::to_string(culprit_floor));
    }
}

std::vector<double> OutputComparison::parametric_p() const { return p_values(parametric); }
std::vector<double> OutputComparison::nonparametric_p() const { return p_values(nonparametric); }

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::aligned: return "aligned";
        case Verdict::misaligned: return "misaligned";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Verdict verdict_from_string(std::string_view name) {
    if (name == "aligned") return Verdict::aligned;
    if (name == "misaligned") return Verdict::misaligned;
    if (name == "inconclusive") return Verdict::inconclusive;
    throw ParseError("unknown verdict '" + std::string(name) + "'");
}

OutputComparison compare_output(const OutputMatrix& out, const CompareOptions& options) {
    options.validate();
    try {
        OutputComparison oc;
        oc.output_name = out.name();
        oc.groups = out.group_order();
        oc.threshold = options.variance;
        oc.adjust = options.adjust;

        const PcaResult pc = pca_of(out.values());
        Eigen::Index u = 0;
        const double top = pc.components() > 0 ? pc.eigenvalues(0) : 0.0;
        while (u < pc.components() && pc.eigenvalues(u) > kRankTolerance * top) ++u;
        if (u == 0) throw AllZeroVarianceError("every column is constant");
        oc.eigenvalues.assign(pc.eigenvalues.data(), pc.eigenvalues.data() + u);
        oc.explained = explained_variance(oc.eigenvalues);

        for (double theta : kVarianceLadder) oc.npcs_at[theta] = num_pcs_for_variance(oc.explained, theta);
        oc.npcs_at[options.variance] = num_pcs_for_variance(oc.explained, options.variance);

        const auto group_of = out.group_index();
        const std::size_t s = oc.groups.size();
        const Eigen::MatrixXd scores = pc.scores.leftCols(u);

        for (Eigen::Index k = 0; k < u; ++k) {
            const auto samples = detail::split_column(scores, k, group_of, s);
            oc.parametric.push_back(detail::location_test(samples, options.t_variant));
            oc.nonparametric.push_back(detail::rank_test(samples));

            std::vector<OptionalTest> shapiro;
            for (const auto& g : samples) shapiro.push_back(attempt([&] { return shapiro_wilk(g); }));
            oc.assumptions.shapiro.push_back(std::move(shapiro));
            oc.assumptions.bartlett.push_back(attempt([&] { return bartlett(samples); }));
        }
        oc.adjusted_p = adjust(oc.parametric_p(), options.adjust, oc.explained);
        oc.adjusted_nonparametric_p = adjust(oc.nonparametric_p(), options.adjust, oc.explained);

        const int d = oc.npcs();
        const Eigen::MatrixXd subspace = scores.leftCols(d);
        if (d < 2) {
            oc.manova.reason = kReasonSinglePc;
        } else {
            try {
                oc.manova.result = manova(subspace, group_of);
            } catch (const SingularScatterError&) {
                oc.manova.reason = kReasonSingularScatter;
            }
        }

        std::vector<Eigen::MatrixXd> blocks(s);
        for (std::size_t g = 0; g < s; ++g) {
            const auto count = std::count(group_of.begin(), group_of.end(), g);
            blocks[g].resize(count, d);
            Eigen::Index at = 0;
            for (Eigen::Index r = 0; r < subspace.rows(); ++r) {
                if (group_of[static_cast<std::size_t>(r)] == g) blocks[g].row(at++) = subspace.row(r);
            }
            if (d < 2) {
                oc.assumptions.royston.push_back({std::nullopt, std::string(kReasonSinglePc)});
            } else {
                oc.assumptions.royston.push_back(attempt([&] { return royston(blocks[g]); }));
            }
        }
        oc.assumptions.box_m = attempt([&] { return box_m(blocks); });

        const auto& rows = out.group_of_row();
        oc.scatter.reserve(rows.size());
        for (Eigen::Index r = 0; r < scores.rows(); ++r) {
            oc.scatter.push_back({scores(r, 0), u > 1 ? scores(r, 1) : 0.0, rows[static_cast<std::size_t>(r)]});
        }
        return oc;
    } catch (const Error&) {
        rethrow_with_context("output '" + out.name() + "'");
    }
}

OutputComparison compare_output(const OutputMatrix& out, double variance, double alpha) {
    CompareOptions o;
    o.variance = variance;
    o.alpha = alpha;
    return compare_output(out, o);
}

ModelComparison compare_outputs(std::span<const OutputMatrix> outputs, const CompareOptions& options) {
    options.validate();
    if (outputs.empty()) throw ValidationError("no outputs to compare");
    const OutputMatrix joined = concatenate_outputs(outputs);

    std::vector<OutputComparison> results(outputs.size() + 1);
    parallel_for(results.size(), [&](std::size_t i) {
        results[i] = compare_output(i < outputs.size() ? outputs[i] : joined, options);
    });

    ModelComparison mc;
    mc.concatenated = std::move(results.back());
    results.pop_back();
    mc.per_output = std::move(results);
    mc.options = options;
    for (const auto& o : outputs) mc.spec_echo.outputs.push_back(o.name());
    const auto& labels = outputs.front().group_of_row();
    for (const auto& label : outputs.front().group_order()) {
        GroupSource g;
        g.label = label;
        g.replications = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
        mc.spec_echo.groups.push_back(std::move(g));
    }
    mc.spec_echo.options.variance = options.variance;
    mc.spec_echo.options.alpha = options.alpha;
    mc.spec_echo.options.adjust = options.adjust;
    mc.summary = summarize(mc, options);
    return mc;
}

ModelComparison compare_model(const ComparisonSpec& spec, const CompareOptions& options) {
    spec.validate();
    std::vector<OutputMatrix> outputs;
    outputs.reserve(spec.outputs.size());
    for (const auto& name : spec.outputs) outputs.push_back(load_output_matrix(spec, name));
    ModelComparison mc = compare_outputs(outputs, options);
    mc.spec_echo = spec;
    return mc;
}

ModelComparison compare_model(const ComparisonSpec& spec) {
    return compare_model(spec, CompareOptions::from(spec.options));
}

OutputVerdict judge_output(const OutputComparison& oc, const CompareOptions& options) {
    const double alpha = options.alpha;
    const std::string track = options.nonparametric ? "rank" : "parametric";
    const auto raw = options.nonparametric ? oc.nonparametric_p() : oc.parametric_p();
    const auto& adjusted = options.nonparametric ? oc.adjusted_nonparametric_p : oc.adjusted_p;
    const std::string at = " < " + fmt("%g", alpha);
    const std::string floor = fmt("%g", 100.0 * options.culprit_floor) + "%";

    OutputVerdict v;
    v.output_name = oc.output_name;
    v.significant = static_cast<std::size_t>(std::count_if(raw.begin(), raw.end(), [&](double p) { return p < alpha; }));
    v.envelope_high = dist::binomial_envelope(raw.size(), alpha, 0.99).second;

    // PC1 decides on its own; a later PC only when it carries enough variance
    // to matter. Weaker hits stay in the evidence.
    bool decisive = false;
    for (std::size_t k = 0; k < adjusted.size(); ++k) {
        if (!(adjusted[k] < alpha)) continue;
        const bool relevant = k == 0 || oc.explained[k] >= options.culprit_floor;
        decisive |= relevant;
        v.evidence.push_back(pc_label(k) + " adjusted " + track + " p = " + fmt("%.3g", adjusted[k]) + at +
                             ", explains " + fmt("%.3g", 100.0 * oc.explained[k]) + "% of variance" +
                             (relevant ? "" : " (below the " + floor + " relevance floor)"));
    }

    const auto manova_p = oc.manova.p();
    bool manova_hit = false;
    if (manova_p && *manova_p < alpha) {
        manova_hit = true;
        v.evidence.push_back("MANOVA over " + std::to_string(oc.npcs()) + " PCs p = " + fmt("%.3g", *manova_p) + at);
        for (int k = 0; k < oc.npcs() && static_cast<std::size_t>(k) < raw.size(); ++k) {
            const auto kk = static_cast<std::size_t>(k);
            if (raw[kk] < alpha) v.culprits.push_back({k + 1, raw[kk], oc.explained[kk]});
        }
    }

    if (decisive) {
        v.verdict = Verdict::misaligned;
        return v;
    }
    if (manova_hit) {
        const bool relevant = std::any_of(v.culprits.begin(), v.culprits.end(),
                                          [&](const Culprit& c) { return c.explained >= options.culprit_floor; });
        v.verdict = relevant ? Verdict::misaligned : Verdict::inconclusive;
        for (const auto& c : v.culprits) {
            v.evidence.push_back("culprit " + pc_label(static_cast<std::size_t>(c.pc - 1)) + " unadjusted p = " +
                                 fmt("%.3g", c.p_value) + ", explains " + fmt("%.3g", 100.0 * c.explained) +
                                 "% of variance");
        }
        if (!relevant) {
            v.evidence.push_back("no PC in the MANOVA subspace with unadjusted p" + at + " explains at least " + floor +
                                 " of variance");
        }
        return v;
    }
    if (v.significant <= v.envelope_high) {
        v.verdict = Verdict::aligned;
    } else {
        v.verdict = Verdict::inconclusive;
        v.evidence.push_back(std::to_string(v.significant) + " of " + std::to_string(raw.size()) + " unadjusted p" + at +
                             ", above the binomial 99% bound of " + std::to_string(v.envelope_high));
    }
    return v;
}

AlignmentSummary summarize(const ModelComparison& mc, const CompareOptions& options) {
    AlignmentSummary s;
    s.alpha = options.alpha;
    std::vector<const OutputComparison*> all;
    for (const auto& oc : mc.per_output) all.push_back(&oc);
    all.push_back(&mc.concatenated);

    CompareOptions other = options;
    other.nonparametric = !options.nonparametric;
    bool any_misaligned = false;
    bool any_inconclusive = false;
    for (const auto* oc : all) {
        OutputVerdict v = judge_output(*oc, options);
        any_misaligned |= v.verdict == Verdict::misaligned;
        any_inconclusive |= v.verdict == Verdict::inconclusive;

        const Verdict alt = judge_output(*oc, other).verdict;
        if (alt != v.verdict) {
            s.notes.push_back(oc->output_name + ": " + (options.nonparametric ? "parametric" : "rank") +
                              " track would give " + std::string(to_string(alt)) + " instead of " +
                              std::string(to_string(v.verdict)));
        }

        std::size_t rejected = 0;
        std::size_t tested = 0;
        for (const auto& per_group : oc->assumptions.shapiro) {
            for (const auto& t : per_group) {
                if (!t.result) continue;
                ++tested;
                rejected += t.result->p_value < 0.05 ? 1 : 0;
            }
        }
        if (tested > 0 && rejected > dist::binomial_envelope(tested, 0.05, 0.99).second) {
            s.notes.push_back(oc->output_name + ": Shapiro-Wilk rejects normality for " + std::to_string(rejected) +
                              " of " + std::to_string(tested) + " PC/group samples; prefer the rank track");
        }
        s.outputs.push_back(std::move(v));
    }
    s.overall = any_misaligned ? Verdict::misaligned : any_inconclusive ? Verdict::inconclusive : Verdict::aligned;
    return s;
}

AlignmentSummary summarize(const ModelComparison& mc, double alpha) {
    CompareOptions o = mc.options;
    o.alpha = alpha;
    return summarize(mc, o);
}

}  // namespace simalign
