#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "simalign/errors.hpp"
#include "simalign/report.hpp"

using namespace simalign;

namespace {

OutputMatrix walks(int per_group, int cols, double shift, unsigned seed, const std::string& name) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd v(2 * per_group, cols);
    std::vector<std::string> labels;
    for (int r = 0; r < 2 * per_group; ++r) {
        double level = 10.0;
        for (int c = 0; c < cols; ++c) {
            level += n(rng);
            v(r, c) = level + (r >= per_group ? shift : 0.0);
        }
        labels.push_back(r < per_group ? "ref" : "alt");
    }
    return OutputMatrix(name, std::move(v), std::move(labels));
}

}  // namespace

TEST_CASE("p-value formatting", "[report]") {
    CHECK(format_p(0.2134) == "0.213");
    CHECK(format_p(1.0) == "1.000");
    CHECK(format_p(0.001) == "0.001");
    CHECK(format_p(4.56e-5) == "4.56e-05");
    CHECK(format_p(1e-8) == "1.00e-08");
    CHECK(format_p(3e-9) == "<1e-08");
    CHECK(format_p(0.0) == "<1e-08");

    CHECK(significance_mark(0.2) == "");
    CHECK(significance_mark(0.05) == "");
    CHECK(significance_mark(0.03) == "*");
    CHECK(significance_mark(0.0099) == "**");
    CHECK(marked_p(0.004) == "0.004**");
    CHECK(marked_p(0.3) == "0.300");
}

TEST_CASE("comparison report round trip", "[report]") {
    const std::vector<OutputMatrix> outs = {walks(8, 20, 0.0, 1, "p"), walks(8, 25, 3.0, 2, "q")};
    auto mc = compare_outputs(outs, CompareOptions{});
    // Non-finite values must survive the trip too.
    mc.per_output[0].parametric[0].df.push_back(std::numeric_limits<double>::infinity());

    const auto json = render_json(mc);
    CHECK(json.find("\"kind\"") != std::string::npos);
    const auto back = parse_comparison_json(json);
    CHECK(back == mc);
    CHECK(render_json(back) == json);

    CHECK_THROWS_AS(parse_comparison_json("{"), ParseError);
    CHECK_THROWS_AS(parse_comparison_json(R"({"kind": "focal-measures"})"), ParseError);

    const auto table = render_table(mc);
    CHECK(table.find("PC1 t-test") != std::string::npos);
    CHECK(table.find("A~") != std::string::npos);
    CHECK(table.find(std::string(to_string(mc.summary.overall))) != std::string::npos);

    const auto csv = render_scatter_csv(mc);
    CHECK(csv.rfind("output,group,pc1,pc2\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 16);
}

TEST_CASE("focal-measure report round trip", "[report]") {
    const std::vector<OutputMatrix> outs = {walks(8, 20, 0.0, 3, "p"), walks(8, 20, 0.0, 4, "q")};
    const auto report = compare_fm_outputs(outs, 5, 0.05);
    const auto json = render_json(report);
    const auto back = parse_fm_report_json(json);
    CHECK(back == report);
    CHECK(render_json(back) == json);
    CHECK_THROWS_AS(parse_fm_report_json(render_json(compare_outputs(outs, CompareOptions{}))), ParseError);

    const auto table = render_table(report);
    for (auto fm : kFocalMeasures) CHECK(table.find(std::string(to_string(fm))) != std::string::npos);
}
