#include "simalign/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "simalign/comparator.hpp"
#include "simalign/errors.hpp"
#include "simalign/focalmeasures.hpp"
#include "simalign/pphpc.hpp"
#include "simalign/report.hpp"

namespace simalign::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::aligned: return kExitAligned;
        case Verdict::misaligned: return kExitMisaligned;
        case Verdict::inconclusive: return kExitInconclusive;
    }
    return kExitInconclusive;
}

struct SimulateArgs {
    int size = 100;
    int set = 1;
    std::string variant = "reference";
    int reps = 30;
    long long offset = 0;
    int iters = 4000;
    std::string out_dir;
    std::string label;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    auto params = pphpc::Params::for_size(a.size, a.set);
    params.variant = pphpc::variant_from_string(a.variant);
    params.iterations = a.iters;
    params.validate();
    if (a.reps < 2) throw ValidationError("--reps must be at least 2, got " + std::to_string(a.reps));
    if (a.offset < 0) throw ValidationError("--offset must be >= 0");

    const auto data = pphpc::run_experiment(params, static_cast<std::size_t>(a.reps),
                                            static_cast<std::uint64_t>(a.offset));
    const fs::path dir(a.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

    const std::string label = a.label.empty() ? std::string(pphpc::to_string(params.variant)) + "-r" +
                                                    std::to_string(a.offset + 1) + "-" +
                                                    std::to_string(a.offset + a.reps)
                                              : a.label;
    Json files = Json::object();
    Json outputs = Json::array();
    for (std::size_t k = 0; k < pphpc::kOutputCount; ++k) {
        const std::string name(pphpc::kOutputNames[k]);
        write_csv_matrix(dir / (name + ".csv"), data[k]);
        files[name] = name + ".csv";
        outputs.push_back(name);
    }
    Json fragment{{"outputs", outputs},
                  {"groups", Json::array({Json{{"label", label}, {"files", files}, {"n", a.reps}}})},
                  {"options", Json{{"truncation", pphpc::default_truncation(a.set)}}},
                  {"simulation",
                   Json{{"size", a.size},
                        {"set", a.set},
                        {"variant", std::string(pphpc::to_string(params.variant))},
                        {"replications", a.reps},
                        {"offset", a.offset},
                        {"iterations", a.iters}}}};
    write_text(dir / "manifest.json", fragment.dump(2) + "\n");
    out << "wrote " << pphpc::kOutputCount << " outputs of " << a.reps << "x" << (a.iters + 1) << " to "
        << dir.string() << "\n";
    return kExitAligned;
}

// Joins manifest fragments (one or more groups each) into one manifest whose
// paths are relative to the merged file.
int cmd_merge(const std::vector<std::string>& inputs, const std::string& output, std::ostream& out) {
    const fs::path target(output);
    const fs::path target_dir = fs::absolute(target).parent_path();
    Json merged{{"outputs", nullptr}, {"groups", Json::array()}, {"options", Json::object()}};
    for (const auto& input : inputs) {
        Json doc;
        try {
            doc = Json::parse(read_text(input));
            const fs::path base = fs::absolute(fs::path(input)).parent_path();
            if (merged["outputs"].is_null()) merged["outputs"] = doc.at("outputs");
            if (doc.at("outputs") != merged["outputs"]) {
                throw ValidationError("'" + input + "' declares different outputs");
            }
            if (doc.contains("options")) {
                for (const auto& [key, value] : doc.at("options").items()) {
                    if (merged["options"].contains(key) && merged["options"][key] != value) {
                        throw ValidationError("conflicting option '" + key + "' in '" + input + "'");
                    }
                    merged["options"][key] = value;
                }
            }
            for (auto group : doc.at("groups")) {
                for (auto& [name, path] : group.at("files").items()) {
                    fs::path p(path.get<std::string>());
                    if (p.is_relative()) p = (base / p).lexically_normal();
                    path = p.lexically_relative(target_dir).generic_string();
                }
                merged["groups"].push_back(group);
            }
        } catch (const Json::exception& e) {
            throw ParseError("malformed manifest '" + input + "': " + e.what());
        }
    }
    const std::string text = merged.dump(2) + "\n";
    parse_manifest(text, target_dir);  // validates the merged result
    write_text(target, text);
    out << "wrote " << target.string() << "\n";
    return kExitAligned;
}

struct CompareArgs {
    std::string manifest;
    std::optional<double> variance;
    std::optional<double> alpha;
    std::optional<std::string> adjust;
    std::string format = "table";
    std::string report_out;
    std::string scatter_out;
    bool nonparametric = false;
    bool welch = false;
};

void emit(std::ostream& out, const std::string& format, const std::string& table, const std::string& json) {
    if (format == "table" || format == "both") out << table;
    if (format == "both") out << "\n";
    if (format == "json" || format == "both") out << json;
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
    ComparisonSpec spec = load_manifest(a.manifest);
    if (a.variance) spec.options.variance = *a.variance;
    if (a.alpha) spec.options.alpha = *a.alpha;
    if (a.adjust) spec.options.adjust = adjust_method_from_string(*a.adjust);
    spec.validate();
    CompareOptions options = CompareOptions::from(spec.options);
    options.nonparametric = a.nonparametric;
    options.t_variant = a.welch ? TTestVariant::welch : TTestVariant::pooled;

    const ModelComparison mc = compare_model(spec, options);
    const std::string json = render_json(mc);
    if (!a.report_out.empty()) write_text(a.report_out, json);
    if (!a.scatter_out.empty()) write_text(a.scatter_out, render_scatter_csv(mc));
    emit(out, a.format, render_table(mc), json);
    return exit_code(mc.summary.overall);
}

struct FmArgs {
    std::string manifest;
    int truncation = 0;
    std::optional<double> alpha;
    std::string format = "table";
    std::string report_out;
    std::string fm_dir;
    bool welch = false;
};

int cmd_fm_compare(const FmArgs& a, std::ostream& out) {
    ComparisonSpec spec = load_manifest(a.manifest);
    if (a.alpha) spec.options.alpha = *a.alpha;
    spec.options.truncation = a.truncation;
    spec.validate();
    std::vector<OutputMatrix> outputs;
    for (const auto& name : spec.outputs) outputs.push_back(load_output_matrix(spec, name));
    const auto variant = a.welch ? TTestVariant::welch : TTestVariant::pooled;
    const FocalMeasureReport report = compare_fm_outputs(outputs, a.truncation, spec.options.alpha, variant);

    if (!a.fm_dir.empty()) {
        std::error_code ec;
        fs::create_directories(a.fm_dir, ec);
        if (ec) throw IoError("cannot create '" + a.fm_dir + "': " + ec.message());
        for (const auto& o : outputs) write_fm_csv(fs::path(a.fm_dir) / (o.name() + "_fm.csv"), extract_fms(o, a.truncation));
    }
    const std::string json = render_json(report);
    if (!a.report_out.empty()) write_text(a.report_out, json);
    emit(out, a.format, render_table(report), json);
    return exit_code(report.verdict);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Compare stochastic simulation implementations for statistical alignment", "simalign"};
    app.require_subcommand(1);
    const std::vector<std::string> formats = {"json", "table", "both"};
    const std::vector<std::string> variants = {"reference", "no-shuffle-sorted", "cr-minus-one",
                                               "no_shuffle_sorted", "cr_minus_one"};
    const std::vector<std::string> adjustments = {"none", "bonferroni", "holm", "weighted"};

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run PPHPC replications and write one CSV per output");
    simulate->add_option("--size", sim.size, "Grid side (100 = 400 prey, 200 predators)")->check(CLI::PositiveNumber);
    simulate->add_option("--set", sim.set, "Parameter set")->check(CLI::IsMember({1, 2}));
    simulate->add_option("--variant", sim.variant, "Model variant")->check(CLI::IsMember(variants));
    simulate->add_option("--reps", sim.reps, "Replications (>= 2)")->check(CLI::Range(2, 1 << 30));
    simulate->add_option("--offset", sim.offset, "Replications run r = offset+1 .. offset+reps")
        ->check(CLI::NonNegativeNumber);
    simulate->add_option("--iters", sim.iters, "Iterations m")->check(CLI::PositiveNumber);
    simulate->add_option("--out-dir", sim.out_dir, "Output directory")->required();
    simulate->add_option("--label", sim.label, "Group label in the manifest fragment");

    std::vector<std::string> merge_inputs;
    std::string merge_output;
    auto* merge = app.add_subcommand("merge", "Join manifest fragments into one comparison manifest");
    merge->add_option("fragments", merge_inputs, "Fragment manifests")->required()->check(CLI::ExistingFile);
    merge->add_option("-o,--out", merge_output, "Merged manifest path")->required();

    CompareArgs cmp;
    auto* compare = app.add_subcommand("compare", "Model-independent PCA comparison");
    compare->add_option("--manifest", cmp.manifest, "Comparison manifest")->required();
    compare->add_option("--variance", cmp.variance, "Variance share for the MANOVA subspace");
    compare->add_option("--alpha", cmp.alpha, "Significance level");
    compare->add_option("--adjust", cmp.adjust, "Multiple-testing adjustment")->check(CLI::IsMember(adjustments));
    compare->add_option("--format", cmp.format, "Report on stdout")->check(CLI::IsMember(formats));
    compare->add_option("--report-out", cmp.report_out, "Write the JSON report here");
    compare->add_option("--scatter-out", cmp.scatter_out, "Write PC1/PC2 scores as CSV");
    compare->add_flag("--nonparametric", cmp.nonparametric, "Base the verdict on rank tests");
    compare->add_flag("--welch", cmp.welch, "Welch instead of pooled t-tests");

    FmArgs fm;
    auto* fm_compare = app.add_subcommand("fm-compare", "Empirical focal-measure comparison");
    fm_compare->add_option("--manifest", fm.manifest, "Comparison manifest")->required();
    fm_compare->add_option("--truncation", fm.truncation, "Steady-state truncation point l")
        ->required()
        ->check(CLI::NonNegativeNumber);
    fm_compare->add_option("--alpha", fm.alpha, "Significance level");
    fm_compare->add_option("--format", fm.format, "Report on stdout")->check(CLI::IsMember(formats));
    fm_compare->add_option("--report-out", fm.report_out, "Write the JSON report here");
    fm_compare->add_option("--fm-out-dir", fm.fm_dir, "Write per-output focal-measure CSVs here");
    fm_compare->add_flag("--welch", fm.welch, "Welch instead of pooled t-tests");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitAligned;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitAligned;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim, out);
        if (merge->parsed()) return cmd_merge(merge_inputs, merge_output, out);
        if (compare->parsed()) return cmd_compare(cmp, out);
        if (fm_compare->parsed()) return cmd_fm_compare(fm, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}

}  // namespace simalign::cli
