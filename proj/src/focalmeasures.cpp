#include "simalign/focalmeasures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "group_tests.hpp"
#include "simalign/distributions.hpp"
#include "simalign/errors.hpp"
#include "simalign/parallel.hpp"

namespace simalign {

namespace {

bool is_rank_measure(FocalMeasure fm) { return fm == FocalMeasure::argmax || fm == FocalMeasure::argmin; }

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

void append_number(std::string& line, double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    line.append(buf, ptr);
}

}  // namespace

std::string_view to_string(FocalMeasure fm) {
    switch (fm) {
        case FocalMeasure::max: return "max";
        case FocalMeasure::argmax: return "argmax";
        case FocalMeasure::min: return "min";
        case FocalMeasure::argmin: return "argmin";
        case FocalMeasure::ss_mean: return "ss_mean";
        case FocalMeasure::ss_std: return "ss_std";
    }
    return "max";
}

FocalMeasure focal_measure_from_string(std::string_view name) {
    for (auto fm : kFocalMeasures) {
        if (to_string(fm) == name) return fm;
    }
    throw ParseError("unknown focal measure '" + std::string(name) + "'");
}

double FocalMeasureRecord::value(FocalMeasure fm) const {
    switch (fm) {
        case FocalMeasure::max: return max;
        case FocalMeasure::argmax: return argmax;
        case FocalMeasure::min: return min;
        case FocalMeasure::argmin: return argmin;
        case FocalMeasure::ss_mean: return ss_mean;
        case FocalMeasure::ss_std: return ss_std;
    }
    return 0.0;
}

FocalMeasureTable extract_fms(const OutputMatrix& out, int truncation) {
    const Eigen::Index m = out.cols() - 1;
    if (truncation < 0 || truncation > m - 2) {
        throw TruncationError("output '" + out.name() + "': truncation " + std::to_string(truncation) +
                              " outside [0, " + std::to_string(m - 2) + "]");
    }
    FocalMeasureTable t;
    t.output_name = out.name();
    t.truncation = truncation;
    t.groups = out.group_order();
    const auto& values = out.values();
    const auto& labels = out.group_of_row();
    const Eigen::Index first = truncation + 1;
    const Eigen::Index count = m - truncation;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        FocalMeasureRecord rec;
        rec.group = labels[static_cast<std::size_t>(r)];
        rec.max = rec.min = values(r, 0);
        for (Eigen::Index c = 1; c <= m; ++c) {
            const double v = values(r, c);
            if (v > rec.max) {
                rec.max = v;
                rec.argmax = static_cast<int>(c);
            }
            if (v < rec.min) {
                rec.min = v;
                rec.argmin = static_cast<int>(c);
            }
        }
        const auto slice = values.row(r).segment(first, count);
        rec.ss_mean = slice.mean();
        rec.ss_std = std::sqrt((slice.array() - rec.ss_mean).square().sum() / static_cast<double>(count - 1));
        t.records.push_back(std::move(rec));
    }
    return t;
}

FocalMeasureComparison compare_fms(const FocalMeasureTable& table, double alpha, TTestVariant variant) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0,1), got " + std::to_string(alpha));
    const std::size_t s = table.groups.size();
    if (s < 2) throw ValidationError("focal-measure comparison needs at least 2 groups");

    std::vector<std::size_t> group_of;
    for (const auto& rec : table.records) {
        const auto it = std::find(table.groups.begin(), table.groups.end(), rec.group);
        if (it == table.groups.end()) throw ValidationError("record for undeclared group '" + rec.group + "'");
        group_of.push_back(static_cast<std::size_t>(it - table.groups.begin()));
    }

    FocalMeasureComparison c;
    c.output_name = table.output_name;
    try {
        for (auto fm : kFocalMeasures) {
            detail::Samples samples(s);
            for (std::size_t i = 0; i < table.records.size(); ++i) samples[group_of[i]].push_back(table.records[i].value(fm));
            for (std::size_t g = 0; g < s; ++g) {
                if (samples[g].size() < 2) {
                    throw EmptyGroupError("group '" + table.groups[g] + "' has fewer than 2 replications");
                }
            }
            FocalMeasureTest t;
            t.measure = fm;
            t.test = is_rank_measure(fm) ? detail::rank_test(samples) : detail::location_test(samples, variant);
            for (const auto& g : samples) t.shapiro.push_back(attempt([&] { return shapiro_wilk(g); }));
            t.bartlett = attempt([&] { return bartlett(samples); });
            c.tests.push_back(std::move(t));
        }
    } catch (const Error&) {
        rethrow_with_context("output '" + table.output_name + "'");
    }
    return c;
}

FocalMeasureReport compare_fm_outputs(std::span<const OutputMatrix> outputs, int truncation, double alpha,
                                      TTestVariant variant) {
    if (outputs.empty()) throw ValidationError("no outputs to compare");
    FocalMeasureReport report;
    report.alpha = alpha;
    report.truncation = truncation;
    report.outputs.resize(outputs.size());
    parallel_for(outputs.size(), [&](std::size_t i) {
        report.outputs[i] = compare_fms(extract_fms(outputs[i], truncation), alpha, variant);
    });

    std::vector<double> grid;
    for (const auto& oc : report.outputs) {
        for (const auto& t : oc.tests) grid.push_back(t.test.p_value);
    }
    report.tests = grid.size();
    report.significant =
        static_cast<std::size_t>(std::count_if(grid.begin(), grid.end(), [&](double p) { return p < alpha; }));
    report.envelope_high = dist::binomial_envelope(grid.size(), alpha, 0.99).second;

    const auto adjusted = adjust_pvalues(grid, AdjustMethod::bonferroni);
    bool hit = false;
    char buf[160];
    for (std::size_t i = 0; i < adjusted.size(); ++i) {
        if (adjusted[i] < alpha) {
            hit = true;
            const auto& oc = report.outputs[i / kFocalMeasures.size()];
            const auto& t = oc.tests[i % kFocalMeasures.size()];
            std::snprintf(buf, sizeof buf, "%s %s: p = %.3g, Bonferroni-adjusted p = %.3g < %g", oc.output_name.c_str(),
                          std::string(to_string(t.measure)).c_str(), t.test.p_value, adjusted[i], alpha);
            report.evidence.emplace_back(buf);
        }
    }
    if (hit) {
        report.verdict = Verdict::misaligned;
    } else if (report.significant > report.envelope_high) {
        report.verdict = Verdict::inconclusive;
        report.evidence.push_back(std::to_string(report.significant) + " of " + std::to_string(report.tests) +
                                  " raw p-values below alpha, above the binomial 99% bound of " +
                                  std::to_string(report.envelope_high));
    } else {
        report.verdict = Verdict::aligned;
    }
    return report;
}

std::string render_fm_csv(const FocalMeasureTable& table) {
    std::string text = "group,replication,max,argmax,min,argmin,ss_mean,ss_std\n";
    std::vector<std::size_t> seen(table.groups.size(), 0);
    for (const auto& rec : table.records) {
        const auto g = static_cast<std::size_t>(std::find(table.groups.begin(), table.groups.end(), rec.group) -
                                                table.groups.begin());
        const std::size_t replication = g < seen.size() ? ++seen[g] : 0;
        text += rec.group;
        text += ',' + std::to_string(replication) + ',';
        append_number(text, rec.max);
        text += ',' + std::to_string(rec.argmax) + ',';
        append_number(text, rec.min);
        text += ',' + std::to_string(rec.argmin) + ',';
        append_number(text, rec.ss_mean);
        text += ',';
        append_number(text, rec.ss_std);
        text += '\n';
    }
    return text;
}

void write_fm_csv(const std::filesystem::path& path, const FocalMeasureTable& table) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << render_fm_csv(table);
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace simalign
