#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "simalign/comparator.hpp"
#include "simalign/distributions.hpp"
#include "simalign/errors.hpp"

using namespace simalign;

namespace {

// Rows are noisy random walks; `shift` is added to every cell of group 2.
OutputMatrix walks(int per_group, int cols, double shift, unsigned seed, const std::string& name = "x") {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd v(2 * per_group, cols);
    std::vector<std::string> labels;
    for (int r = 0; r < 2 * per_group; ++r) {
        double level = 10.0;
        for (int c = 0; c < cols; ++c) {
            level += n(rng);
            v(r, c) = level + 0.5 * n(rng) + (r >= per_group ? shift : 0.0);
        }
        labels.push_back(r < per_group ? "a" : "b");
    }
    return OutputMatrix(name, std::move(v), std::move(labels));
}

// Hand-built comparison with given per-PC p-values and explained variance.
OutputComparison synthetic(const std::string& name, const std::vector<double>& p, const std::vector<double>& explained,
                           std::optional<double> manova_p, int npcs) {
    OutputComparison oc;
    oc.output_name = name;
    oc.groups = {"a", "b"};
    oc.explained = explained;
    oc.eigenvalues = explained;
    oc.threshold = 0.9;
    oc.npcs_at[0.9] = npcs;
    for (double v : p) {
        TestResult t;
        t.p_value = v;
        oc.parametric.push_back(t);
        t.method = TestMethod::mann_whitney;
        oc.nonparametric.push_back(t);
    }
    oc.adjusted_p = adjust_pvalues(p, AdjustMethod::weighted, explained);
    oc.adjusted_nonparametric_p = oc.adjusted_p;
    if (manova_p) {
        TestResult m;
        m.method = TestMethod::manova_wilks;
        m.p_value = *manova_p;
        oc.manova.result = m;
    } else {
        oc.manova.reason = std::string(kReasonSinglePc);
    }
    return oc;
}

ModelComparison model_of(std::vector<OutputComparison> outs, OutputComparison concat) {
    ModelComparison mc;
    mc.per_output = std::move(outs);
    mc.concatenated = std::move(concat);
    return mc;
}

const std::vector<double> kExplained = {0.6, 0.25, 0.1, 0.045, 0.005};

}  // namespace

TEST_CASE("separable groups are told apart on PC1", "[comparator]") {
    const auto same = compare_output(walks(15, 40, 0.0, 1), 0.9, 0.05);
    const auto shifted = compare_output(walks(15, 40, 25.0, 1), 0.9, 0.05);
    CHECK(shifted.parametric[0].p_value < 1e-6);
    CHECK(shifted.adjusted_p[0] < 1e-6);
    CHECK(shifted.explained[0] > same.explained[0]);

    // Two clusters along PC1.
    double max_a = -1e300, min_b = 1e300, min_a = 1e300, max_b = -1e300;
    for (const auto& s : shifted.scatter) {
        if (s.group == "a") {
            max_a = std::max(max_a, s.pc1);
            min_a = std::min(min_a, s.pc1);
        } else {
            max_b = std::max(max_b, s.pc1);
            min_b = std::min(min_b, s.pc1);
        }
    }
    CHECK((max_a < min_b || max_b < min_a));

    const auto v = judge_output(shifted, CompareOptions{});
    CHECK(v.verdict == Verdict::misaligned);
}

TEST_CASE("OutputComparison invariants", "[comparator]") {
    const auto out = walks(12, 30, 0.5, 4);
    const auto oc = compare_output(out, 0.9, 0.05);
    const auto u = oc.explained.size();
    CHECK(oc.parametric.size() == u);
    CHECK(oc.nonparametric.size() == u);
    CHECK(oc.adjusted_p.size() == u);
    CHECK(oc.eigenvalues.size() == u);
    CHECK(u <= 23u);
    CHECK(oc.scatter.size() == 24u);
    CHECK(oc.parametric[0].method == TestMethod::t_test);
    CHECK(oc.nonparametric[0].method == TestMethod::mann_whitney);
    CHECK(oc.assumptions.shapiro.size() == u);
    CHECK(oc.assumptions.shapiro[0].size() == 2u);
    CHECK(oc.assumptions.bartlett.size() == u);
    CHECK(oc.assumptions.royston.size() == 2u);
    for (double t : kVarianceLadder) CHECK(oc.npcs_at.contains(t));
    CHECK((oc.manova.result.has_value() || oc.manova.reason == kReasonSinglePc ||
           oc.manova.reason == kReasonSingularScatter));

    SECTION("npcs is non-decreasing in the threshold") {
        int last = 0;
        for (const auto& [t, k] : oc.npcs_at) {
            CHECK(k >= last);
            last = k;
        }
    }
    SECTION("deterministic") {
        CHECK(compare_output(out, 0.9, 0.05) == oc);
    }
    SECTION("row permutation within a group") {
        Eigen::MatrixXd v = out.values();
        std::vector<int> perm(24);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.begin() + 12, std::mt19937(3));
        std::shuffle(perm.begin() + 12, perm.end(), std::mt19937(4));
        Eigen::MatrixXd pv(24, v.cols());
        for (int i = 0; i < 24; ++i) pv.row(i) = v.row(perm[static_cast<std::size_t>(i)]);
        const auto po = compare_output(OutputMatrix("x", pv, out.group_of_row()), 0.9, 0.05);
        REQUIRE(po.parametric.size() == u);
        for (std::size_t k = 0; k < u; ++k) {
            CHECK_THAT(po.parametric[k].p_value, Catch::Matchers::WithinAbs(oc.parametric[k].p_value, 1e-9));
            CHECK_THAT(po.nonparametric[k].p_value, Catch::Matchers::WithinAbs(oc.nonparametric[k].p_value, 1e-9));
        }
        if (oc.manova.result) CHECK_THAT(*po.manova.p(), Catch::Matchers::WithinAbs(*oc.manova.p(), 1e-9));
        for (int i = 0; i < 24; ++i) {
            CHECK_THAT(std::abs(po.scatter[static_cast<std::size_t>(i)].pc1),
                       Catch::Matchers::WithinAbs(std::abs(oc.scatter[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])].pc1), 1e-9));
        }
    }
}

TEST_CASE("a single PC leaves MANOVA absent", "[comparator]") {
    // Every row is a multiple of one profile plus tiny noise, so PC1 carries
    // nearly all variance.
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd v(20, 15);
    std::vector<std::string> labels;
    for (int r = 0; r < 20; ++r) {
        const double a = n(rng) * 10.0;
        for (int c = 0; c < 15; ++c) v(r, c) = a * std::sin(0.3 * c + 1.0) + 1e-4 * n(rng);
        labels.push_back(r < 10 ? "a" : "b");
    }
    const auto oc = compare_output(OutputMatrix("x", v, labels), 0.9, 0.05);
    CHECK(oc.npcs() == 1);
    CHECK_FALSE(oc.manova.result.has_value());
    CHECK(oc.manova.reason == kReasonSinglePc);
}

TEST_CASE("more than two groups use ANOVA and Kruskal-Wallis", "[comparator]") {
    const auto base = walks(15, 20, 0.0, 8);
    std::vector<std::string> labels;
    for (int i = 0; i < 30; ++i) labels.push_back(i < 10 ? "a" : i < 20 ? "b" : "c");
    const auto oc = compare_output(OutputMatrix("x", base.values(), labels), 0.9, 0.05);
    CHECK(oc.parametric[0].method == TestMethod::anova);
    CHECK(oc.nonparametric[0].method == TestMethod::kruskal_wallis);
    CHECK(oc.assumptions.royston.size() == 3u);
}

TEST_CASE("compare_outputs adds the concatenated output", "[comparator]") {
    const std::vector<OutputMatrix> outs = {walks(10, 25, 0.0, 1, "p"), walks(10, 30, 0.0, 2, "q")};
    const auto mc = compare_outputs(outs, CompareOptions{});
    REQUIRE(mc.per_output.size() == 2u);
    CHECK(mc.per_output[0].output_name == "p");
    CHECK(mc.per_output[1].output_name == "q");
    CHECK(mc.concatenated.output_name == std::string(kConcatenatedName));
    CHECK(mc.summary.outputs.size() == 3u);
    CHECK(mc.summary.outputs.back().output_name == std::string(kConcatenatedName));
    CHECK(mc.spec_echo.outputs == std::vector<std::string>{"p", "q"});
    CHECK(compare_outputs(outs, CompareOptions{}) == mc);

    CompareOptions bad;
    bad.variance = 0.0;
    CHECK_THROWS_AS(compare_outputs(outs, bad), ValidationError);
}

TEST_CASE("summarize decision rules", "[comparator]") {
    const auto calm = synthetic("calm", {0.6, 0.4, 0.8, 0.3, 0.9}, kExplained, 0.7, 3);

    SECTION("all p-values well above alpha give aligned") {
        const auto s = summarize(model_of({calm, calm}, calm), 0.05);
        CHECK(s.overall == Verdict::aligned);
        for (const auto& v : s.outputs) CHECK(v.verdict == Verdict::aligned);
        CHECK(s.outputs.size() == 3u);
    }
    SECTION("PC1 decides regardless of MANOVA") {
        const auto hit = synthetic("hit", {1e-12, 0.5, 0.5, 0.5, 0.5}, kExplained, 0.9, 3);
        const auto s = summarize(model_of({calm, hit}, calm), 0.05);
        CHECK(s.outputs[1].verdict == Verdict::misaligned);
        CHECK(s.overall == Verdict::misaligned);
        CHECK_FALSE(s.outputs[1].evidence.empty());
    }
    SECTION("MANOVA hit with a relevant culprit") {
        const auto m = synthetic("m", {0.4, 0.02, 0.5, 0.5, 0.5}, kExplained, 1e-9, 3);
        const auto s = summarize(model_of({m}, calm), 0.05);
        CHECK(s.outputs[0].verdict == Verdict::misaligned);
        REQUIRE(s.outputs[0].culprits.size() == 1u);
        CHECK(s.outputs[0].culprits[0].pc == 2);
        CHECK(s.outputs[0].culprits[0].explained == 0.25);
    }
    SECTION("MANOVA hit whose culprits explain too little") {
        const auto m = synthetic("m", {0.4, 0.5, 0.5, 0.5, 0.01}, kExplained, 1e-9, 5);
        const auto s = summarize(model_of({m}, calm), 0.05);
        CHECK(s.outputs[0].verdict == Verdict::inconclusive);
        REQUIRE(s.outputs[0].culprits.size() == 1u);
        CHECK(s.outputs[0].culprits[0].pc == 5);
        CHECK(s.overall == Verdict::inconclusive);
    }
    SECTION("an adjusted hit below the relevance floor does not decide") {
        const auto m = synthetic("m", {0.4, 0.5, 0.5, 0.5, 1e-8}, kExplained, 0.3, 3);
        const auto s = summarize(model_of({m}, calm), 0.05);
        CHECK(s.outputs[0].verdict == Verdict::aligned);
        REQUIRE(s.outputs[0].evidence.size() == 1u);
        CHECK(s.outputs[0].evidence[0].find("relevance floor") != std::string::npos);
    }
    SECTION("too many raw rejections give inconclusive") {
        std::vector<double> p(20, 0.5), w(20, 0.05);
        for (int i = 1; i < 6; ++i) p[static_cast<std::size_t>(i)] = 0.04;
        const auto m = synthetic("m", p, w, 0.3, 10);
        const auto s = summarize(model_of({m}, calm), 0.05);
        CHECK(s.outputs[0].significant == 5u);
        CHECK(s.outputs[0].envelope_high == dist::binomial_envelope(20, 0.05, 0.99).second);
        CHECK(s.outputs[0].verdict == Verdict::inconclusive);
    }
    SECTION("a misaligned concatenation makes the whole model misaligned") {
        const auto hit = synthetic("A~", {1e-5, 0.5, 0.5, 0.5, 0.5}, kExplained, 0.5, 3);
        CHECK(summarize(model_of({calm}, hit), 0.05).overall == Verdict::misaligned);
    }
    CHECK(verdict_from_string("inconclusive") == Verdict::inconclusive);
    CHECK_THROWS_AS(verdict_from_string("maybe"), ParseError);
}

TEST_CASE("false-positive rate is calibrated", "[comparator][calibration]") {
    const int trials = 200;
    int raw_pc1 = 0;
    int adjusted_pc1 = 0;
    int misaligned = 0;
    for (int t = 0; t < trials; ++t) {
        const auto oc = compare_output(walks(10, 30, 0.0, 1000u + static_cast<unsigned>(t)), 0.9, 0.05);
        raw_pc1 += oc.parametric[0].p_value < 0.05 ? 1 : 0;
        adjusted_pc1 += oc.adjusted_p[0] < 0.05 ? 1 : 0;
        misaligned += judge_output(oc, CompareOptions{}).verdict == Verdict::misaligned ? 1 : 0;
    }
    const auto [lo, hi] = dist::binomial_envelope(trials, 0.05, 0.99);
    INFO("raw PC1 rejections " << raw_pc1 << ", adjusted " << adjusted_pc1 << ", misaligned " << misaligned);
    CHECK(static_cast<std::size_t>(raw_pc1) >= lo);
    CHECK(static_cast<std::size_t>(raw_pc1) <= hi);
    CHECK(static_cast<std::size_t>(adjusted_pc1) <= hi);
    CHECK(static_cast<std::size_t>(misaligned) <= hi);
}
