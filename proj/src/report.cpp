#include "simalign/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "simalign/errors.hpp"

namespace simalign {

using Json = nlohmann::ordered_json;

std::string format_p(double p) {
    char buf[32];
    if (std::isnan(p)) return "nan";
    if (p >= 0.001) {
        std::snprintf(buf, sizeof buf, "%.3f", p);
    } else if (p >= 1e-8) {
        std::snprintf(buf, sizeof buf, "%.2e", p);
    } else {
        return "<1e-08";
    }
    return buf;
}

std::string_view significance_mark(double p) {
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

std::string marked_p(double p) { return format_p(p) + std::string(significance_mark(p)); }

namespace {

// JSON has no infinities or NaN; those travel as strings.
Json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double get_num(const Json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ParseError("expected a number, got '" + s + "'");
}

Json nums(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

std::vector<double> get_nums(const Json& j) {
    std::vector<double> out;
    for (const auto& x : j) out.push_back(get_num(x));
    return out;
}

Json to_json(const TestResult& r) {
    return Json{{"method", std::string(to_string(r.method))},
                {"statistic", num(r.statistic)},
                {"p", num(r.p_value)},
                {"df", nums(r.df)},
                {"note", r.note}};
}

TestResult test_from_json(const Json& j) {
    TestResult r;
    r.method = test_method_from_string(j.at("method").get<std::string>());
    r.statistic = get_num(j.at("statistic"));
    r.p_value = get_num(j.at("p"));
    r.df = get_nums(j.at("df"));
    r.note = j.at("note").get<std::string>();
    return r;
}

Json to_json(const OptionalTest& t) {
    return Json{{"result", t.result ? to_json(*t.result) : Json(nullptr)}, {"reason", t.reason}};
}

OptionalTest optional_from_json(const Json& j) {
    OptionalTest t;
    if (!j.at("result").is_null()) t.result = test_from_json(j.at("result"));
    t.reason = j.at("reason").get<std::string>();
    return t;
}

Json tests_json(const std::vector<TestResult>& v) {
    Json a = Json::array();
    for (const auto& t : v) a.push_back(to_json(t));
    return a;
}

std::vector<TestResult> tests_from_json(const Json& j) {
    std::vector<TestResult> out;
    for (const auto& t : j) out.push_back(test_from_json(t));
    return out;
}

Json optionals_json(const std::vector<OptionalTest>& v) {
    Json a = Json::array();
    for (const auto& t : v) a.push_back(to_json(t));
    return a;
}

std::vector<OptionalTest> optionals_from_json(const Json& j) {
    std::vector<OptionalTest> out;
    for (const auto& t : j) out.push_back(optional_from_json(t));
    return out;
}

Json to_json(const OutputComparison& oc) {
    Json npcs = Json::array();
    for (const auto& [theta, k] : oc.npcs_at) npcs.push_back(Json{{"threshold", num(theta)}, {"npcs", k}});
    Json shapiro = Json::array();
    for (const auto& per_group : oc.assumptions.shapiro) shapiro.push_back(optionals_json(per_group));
    Json scatter = Json::array();
    for (const auto& pt : oc.scatter) scatter.push_back(Json{{"pc1", num(pt.pc1)}, {"pc2", num(pt.pc2)}, {"group", pt.group}});
    return Json{{"output", oc.output_name},
                {"groups", oc.groups},
                {"threshold", num(oc.threshold)},
                {"eigenvalues", nums(oc.eigenvalues)},
                {"explained", nums(oc.explained)},
                {"npcs_at", npcs},
                {"parametric", tests_json(oc.parametric)},
                {"nonparametric", tests_json(oc.nonparametric)},
                {"adjust", std::string(to_string(oc.adjust))},
                {"adjusted_p", nums(oc.adjusted_p)},
                {"adjusted_nonparametric_p", nums(oc.adjusted_nonparametric_p)},
                {"manova", to_json(oc.manova)},
                {"assumptions",
                 Json{{"shapiro", shapiro},
                      {"bartlett", optionals_json(oc.assumptions.bartlett)},
                      {"royston", optionals_json(oc.assumptions.royston)},
                      {"box_m", to_json(oc.assumptions.box_m)}}},
                {"scatter", scatter}};
}

OutputComparison output_from_json(const Json& j) {
    OutputComparison oc;
    oc.output_name = j.at("output").get<std::string>();
    oc.groups = j.at("groups").get<std::vector<std::string>>();
    oc.threshold = get_num(j.at("threshold"));
    oc.eigenvalues = get_nums(j.at("eigenvalues"));
    oc.explained = get_nums(j.at("explained"));
    for (const auto& e : j.at("npcs_at")) oc.npcs_at[get_num(e.at("threshold"))] = e.at("npcs").get<int>();
    oc.parametric = tests_from_json(j.at("parametric"));
    oc.nonparametric = tests_from_json(j.at("nonparametric"));
    oc.adjust = adjust_method_from_string(j.at("adjust").get<std::string>());
    oc.adjusted_p = get_nums(j.at("adjusted_p"));
    oc.adjusted_nonparametric_p = get_nums(j.at("adjusted_nonparametric_p"));
    oc.manova = optional_from_json(j.at("manova"));
    const auto& a = j.at("assumptions");
    for (const auto& per_group : a.at("shapiro")) oc.assumptions.shapiro.push_back(optionals_from_json(per_group));
    oc.assumptions.bartlett = optionals_from_json(a.at("bartlett"));
    oc.assumptions.royston = optionals_from_json(a.at("royston"));
    oc.assumptions.box_m = optional_from_json(a.at("box_m"));
    for (const auto& pt : j.at("scatter")) {
        oc.scatter.push_back({get_num(pt.at("pc1")), get_num(pt.at("pc2")), pt.at("group").get<std::string>()});
    }
    return oc;
}

Json to_json(const ComparisonSpec& spec) {
    Json groups = Json::array();
    for (const auto& g : spec.groups) {
        Json files = Json::object();
        for (const auto& [name, path] : g.files) files[name] = path.generic_string();
        groups.push_back(Json{{"label", g.label}, {"files", files}, {"n", g.replications}});
    }
    return Json{{"outputs", spec.outputs},
                {"groups", groups},
                {"options",
                 Json{{"variance", num(spec.options.variance)},
                      {"alpha", num(spec.options.alpha)},
                      {"truncation", spec.options.truncation ? Json(*spec.options.truncation) : Json(nullptr)},
                      {"adjust", std::string(to_string(spec.options.adjust))}}},
                {"base_dir", spec.base_dir.generic_string()}};
}

ComparisonSpec spec_from_json(const Json& j) {
    ComparisonSpec spec;
    spec.outputs = j.at("outputs").get<std::vector<std::string>>();
    for (const auto& g : j.at("groups")) {
        GroupSource group;
        group.label = g.at("label").get<std::string>();
        for (const auto& [name, path] : g.at("files").items()) group.files.emplace(name, path.get<std::string>());
        group.replications = g.at("n").get<std::size_t>();
        spec.groups.push_back(std::move(group));
    }
    const auto& o = j.at("options");
    spec.options.variance = get_num(o.at("variance"));
    spec.options.alpha = get_num(o.at("alpha"));
    if (!o.at("truncation").is_null()) spec.options.truncation = o.at("truncation").get<int>();
    spec.options.adjust = adjust_method_from_string(o.at("adjust").get<std::string>());
    spec.base_dir = j.at("base_dir").get<std::string>();
    return spec;
}

Json to_json(const CompareOptions& o) {
    return Json{{"variance", num(o.variance)},
                {"alpha", num(o.alpha)},
                {"adjust", std::string(to_string(o.adjust))},
                {"t_variant", o.t_variant == TTestVariant::welch ? "welch" : "pooled"},
                {"nonparametric", o.nonparametric},
                {"culprit_floor", num(o.culprit_floor)}};
}

CompareOptions options_from_json(const Json& j) {
    CompareOptions o;
    o.variance = get_num(j.at("variance"));
    o.alpha = get_num(j.at("alpha"));
    o.adjust = adjust_method_from_string(j.at("adjust").get<std::string>());
    const auto variant = j.at("t_variant").get<std::string>();
    if (variant != "welch" && variant != "pooled") throw ParseError("unknown t-test variant '" + variant + "'");
    o.t_variant = variant == "welch" ? TTestVariant::welch : TTestVariant::pooled;
    o.nonparametric = j.at("nonparametric").get<bool>();
    o.culprit_floor = get_num(j.at("culprit_floor"));
    return o;
}

Json to_json(const AlignmentSummary& s) {
    Json outputs = Json::array();
    for (const auto& v : s.outputs) {
        Json culprits = Json::array();
        for (const auto& c : v.culprits) {
            culprits.push_back(Json{{"pc", c.pc}, {"p", num(c.p_value)}, {"explained", num(c.explained)}});
        }
        outputs.push_back(Json{{"output", v.output_name},
                               {"verdict", std::string(to_string(v.verdict))},
                               {"evidence", v.evidence},
                               {"culprits", culprits},
                               {"significant", v.significant},
                               {"envelope_high", v.envelope_high}});
    }
    return Json{{"alpha", num(s.alpha)},
                {"overall", std::string(to_string(s.overall))},
                {"outputs", outputs},
                {"notes", s.notes}};
}

AlignmentSummary summary_from_json(const Json& j) {
    AlignmentSummary s;
    s.alpha = get_num(j.at("alpha"));
    s.overall = verdict_from_string(j.at("overall").get<std::string>());
    for (const auto& o : j.at("outputs")) {
        OutputVerdict v;
        v.output_name = o.at("output").get<std::string>();
        v.verdict = verdict_from_string(o.at("verdict").get<std::string>());
        v.evidence = o.at("evidence").get<std::vector<std::string>>();
        for (const auto& c : o.at("culprits")) {
            v.culprits.push_back({c.at("pc").get<int>(), get_num(c.at("p")), get_num(c.at("explained"))});
        }
        v.significant = o.at("significant").get<std::size_t>();
        v.envelope_high = o.at("envelope_high").get<std::size_t>();
        s.outputs.push_back(std::move(v));
    }
    s.notes = j.at("notes").get<std::vector<std::string>>();
    return s;
}

Json parse_document(std::string_view text, std::string_view kind) {
    try {
        Json j = Json::parse(text);
        if (!j.is_object() || j.value("kind", "") != kind) {
            throw ParseError("not a " + std::string(kind) + " report");
        }
        return j;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what());
    }
}

template <class F>
auto parse_fields(F&& f) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what());
    }
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * fraction);
    return buf;
}

std::string optional_p(const OptionalTest& t) { return t.result ? marked_p(t.result->p_value) : "n/a"; }

}  // namespace

std::string render_json(const ModelComparison& mc) {
    Json outputs = Json::array();
    for (const auto& oc : mc.per_output) outputs.push_back(to_json(oc));
    Json doc{{"kind", "comparison"},
             {"verdict", std::string(to_string(mc.summary.overall))},
             {"options", to_json(mc.options)},
             {"spec", to_json(mc.spec_echo)},
             {"outputs", outputs},
             {"concatenated", to_json(mc.concatenated)},
             {"summary", to_json(mc.summary)}};
    return doc.dump(1) + "\n";
}

ModelComparison parse_comparison_json(std::string_view text) {
    const Json doc = parse_document(text, "comparison");
    return parse_fields([&] {
        ModelComparison mc;
        mc.options = options_from_json(doc.at("options"));
        mc.spec_echo = spec_from_json(doc.at("spec"));
        for (const auto& oc : doc.at("outputs")) mc.per_output.push_back(output_from_json(oc));
        mc.concatenated = output_from_json(doc.at("concatenated"));
        mc.summary = summary_from_json(doc.at("summary"));
        return mc;
    });
}

std::string render_json(const FocalMeasureReport& report) {
    Json outputs = Json::array();
    for (const auto& oc : report.outputs) {
        Json tests = Json::array();
        for (const auto& t : oc.tests) {
            tests.push_back(Json{{"measure", std::string(to_string(t.measure))},
                                 {"test", to_json(t.test)},
                                 {"shapiro", optionals_json(t.shapiro)},
                                 {"bartlett", to_json(t.bartlett)}});
        }
        outputs.push_back(Json{{"output", oc.output_name}, {"tests", tests}});
    }
    Json doc{{"kind", "focal-measures"},
             {"verdict", std::string(to_string(report.verdict))},
             {"alpha", num(report.alpha)},
             {"truncation", report.truncation},
             {"significant", report.significant},
             {"tests", report.tests},
             {"envelope_high", report.envelope_high},
             {"evidence", report.evidence},
             {"outputs", outputs}};
    return doc.dump(1) + "\n";
}

FocalMeasureReport parse_fm_report_json(std::string_view text) {
    const Json doc = parse_document(text, "focal-measures");
    return parse_fields([&] {
        FocalMeasureReport r;
        r.verdict = verdict_from_string(doc.at("verdict").get<std::string>());
        r.alpha = get_num(doc.at("alpha"));
        r.truncation = doc.at("truncation").get<int>();
        r.significant = doc.at("significant").get<std::size_t>();
        r.tests = doc.at("tests").get<std::size_t>();
        r.envelope_high = doc.at("envelope_high").get<std::size_t>();
        r.evidence = doc.at("evidence").get<std::vector<std::string>>();
        for (const auto& o : doc.at("outputs")) {
            FocalMeasureComparison oc;
            oc.output_name = o.at("output").get<std::string>();
            for (const auto& t : o.at("tests")) {
                FocalMeasureTest ft;
                ft.measure = focal_measure_from_string(t.at("measure").get<std::string>());
                ft.test = test_from_json(t.at("test"));
                ft.shapiro = optionals_from_json(t.at("shapiro"));
                ft.bartlett = optional_from_json(t.at("bartlett"));
                oc.tests.push_back(std::move(ft));
            }
            r.outputs.push_back(std::move(oc));
        }
        return r;
    });
}

std::string render_table(const ModelComparison& mc) {
    std::vector<const OutputComparison*> all;
    for (const auto& oc : mc.per_output) all.push_back(&oc);
    all.push_back(&mc.concatenated);
    const bool two_groups = !all.empty() && all.front()->groups.size() == 2;
    const std::string location = two_groups ? "t-test" : "ANOVA";
    const std::string rank = two_groups ? "MW" : "KW";

    std::ostringstream os;
    char theta[32];
    std::snprintf(theta, sizeof theta, "%g", mc.options.variance);
    os << "PC tests (MANOVA over the PCs explaining " << theta << " of variance; * p < 0.05, ** p < 0.01)\n";
    os << pad("Output", 8) << pad("#PCs", 6) << pad("MNV", 12) << pad("PC1 " + location, 13) << pad("PC1 " + rank, 13)
       << pad("PC1 adj", 13) << pad("PC2 " + location, 13) << pad("PC2 adj", 13) << "Verdict\n";
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto& oc = *all[i];
        os << pad(oc.output_name, 8) << pad(std::to_string(oc.npcs()), 6) << pad(optional_p(oc.manova), 12)
           << pad(marked_p(oc.parametric[0].p_value), 13) << pad(marked_p(oc.nonparametric[0].p_value), 13)
           << pad(marked_p(oc.adjusted_p[0]), 13)
           << pad(oc.parametric.size() > 1 ? marked_p(oc.parametric[1].p_value) : "n/a", 13)
           << pad(oc.adjusted_p.size() > 1 ? marked_p(oc.adjusted_p[1]) : "n/a", 13);
        os << (i < mc.summary.outputs.size() ? to_string(mc.summary.outputs[i].verdict) : "") << "\n";
    }

    os << "\n#PCs to explain a share of variance\n";
    os << pad("Output", 8);
    for (double t : kVarianceLadder) os << pad(percent(t), 7);
    os << pad("PC1", 8) << pad("PC2", 8) << "u\n";
    for (const auto* oc : all) {
        os << pad(oc->output_name, 8);
        for (double t : kVarianceLadder) os << pad(std::to_string(oc->npcs_at.at(t)), 7);
        os << pad(percent(oc->explained[0]), 8) << pad(oc->explained.size() > 1 ? percent(oc->explained[1]) : "n/a", 8)
           << oc->explained.size() << "\n";
    }

    os << "\nAssumptions (rejections at 0.05)\n";
    os << pad("Output", 8) << pad("SW", 10) << pad("Bartlett", 10) << pad("Royston", 24) << "Box's M\n";
    for (const auto* oc : all) {
        std::size_t sw_rej = 0, sw_n = 0, b_rej = 0, b_n = 0;
        for (const auto& per_group : oc->assumptions.shapiro) {
            for (const auto& t : per_group) {
                if (!t.result) continue;
                ++sw_n;
                sw_rej += t.result->p_value < 0.05 ? 1 : 0;
            }
        }
        for (const auto& t : oc->assumptions.bartlett) {
            if (!t.result) continue;
            ++b_n;
            b_rej += t.result->p_value < 0.05 ? 1 : 0;
        }
        std::string roy;
        for (std::size_t g = 0; g < oc->assumptions.royston.size(); ++g) {
            if (g > 0) roy += " ";
            roy += optional_p(oc->assumptions.royston[g]);
        }
        os << pad(oc->output_name, 8) << pad(std::to_string(sw_rej) + "/" + std::to_string(sw_n), 10)
           << pad(std::to_string(b_rej) + "/" + std::to_string(b_n), 10) << pad(roy, 24)
           << optional_p(oc->assumptions.box_m) << "\n";
    }

    os << "\nOverall: " << to_string(mc.summary.overall) << "\n";
    for (const auto& v : mc.summary.outputs) {
        for (const auto& e : v.evidence) os << "  " << v.output_name << ": " << e << "\n";
    }
    for (const auto& n : mc.summary.notes) os << "  note: " << n << "\n";
    return os.str();
}

std::string render_table(const FocalMeasureReport& report) {
    std::ostringstream os;
    os << "Focal measures, l = " << report.truncation << " (* p < 0.05, ** p < 0.01, unadjusted)\n";
    os << pad("Stat", 9);
    for (const auto& oc : report.outputs) os << pad(oc.output_name, 12);
    os << "\n";
    for (std::size_t k = 0; k < kFocalMeasures.size(); ++k) {
        os << pad(std::string(to_string(kFocalMeasures[k])), 9);
        for (const auto& oc : report.outputs) os << pad(marked_p(oc.tests[k].test.p_value), 12);
        os << "\n";
    }
    os << "\n" << report.significant << " of " << report.tests << " p-values below " << report.alpha
       << " (binomial 99% bound " << report.envelope_high << ")\n";
    os << "Overall: " << to_string(report.verdict) << "\n";
    for (const auto& e : report.evidence) os << "  " << e << "\n";
    return os.str();
}

std::string render_scatter_csv(const ModelComparison& mc) {
    std::string text = "output,group,pc1,pc2\n";
    char buf[32];
    auto emit = [&](const OutputComparison& oc) {
        for (const auto& pt : oc.scatter) {
            text += oc.output_name + "," + pt.group + ",";
            auto r = std::to_chars(buf, buf + sizeof buf, pt.pc1);
            text.append(buf, r.ptr);
            text += ",";
            r = std::to_chars(buf, buf + sizeof buf, pt.pc2);
            text.append(buf, r.ptr);
            text += "\n";
        }
    };
    for (const auto& oc : mc.per_output) emit(oc);
    emit(mc.concatenated);
    return text;
}

}  // namespace simalign
