#include "simalign/outputdata.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "simalign/errors.hpp"

namespace simalign {

using nlohmann::json;

std::string_view to_string(AdjustMethod method) {
    switch (method) {
        case AdjustMethod::none: return "none";
        case AdjustMethod::bonferroni: return "bonferroni";
        case AdjustMethod::holm: return "holm";
        case AdjustMethod::weighted: return "weighted";
    }
    return "weighted";
}

AdjustMethod adjust_method_from_string(std::string_view name) {
    if (name == "none") return AdjustMethod::none;
    if (name == "bonferroni") return AdjustMethod::bonferroni;
    if (name == "holm") return AdjustMethod::holm;
    if (name == "weighted") return AdjustMethod::weighted;
    throw ValidationError("unknown adjustment method '" + std::string(name) + "'");
}

void ComparisonSpec::validate() const {
    if (outputs.empty()) throw ValidationError("manifest declares no outputs");
    std::set<std::string> seen_outputs;
    for (const auto& name : outputs) {
        if (name.empty()) throw ValidationError("empty output name");
        if (name == kConcatenatedName) {
            throw ValidationError("output name '" + name + "' is reserved");
        }
        if (!seen_outputs.insert(name).second) {
            throw ValidationError("duplicate output '" + name + "'");
        }
    }
    if (groups.size() < 2) {
        throw ValidationError("at least 2 groups are required, got " + std::to_string(groups.size()));
    }
    std::set<std::string> seen_labels;
    for (const auto& group : groups) {
        if (group.label.empty()) throw ValidationError("empty group label");
        if (!seen_labels.insert(group.label).second) {
            throw ValidationError("duplicate group label '" + group.label + "'");
        }
        if (group.replications < 2) {
            throw ValidationError("group '" + group.label + "' declares " +
                                  std::to_string(group.replications) + " replications, need >= 2");
        }
        for (const auto& name : outputs) {
            if (!group.files.contains(name)) {
                throw ValidationError("group '" + group.label + "' has no file for output '" + name + "'");
            }
        }
    }
    if (!(options.variance > 0.0 && options.variance <= 1.0)) {
        throw ValidationError("variance threshold must be in (0,1], got " + std::to_string(options.variance));
    }
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
        throw ValidationError("alpha must be in (0,1), got " + std::to_string(options.alpha));
    }
    if (options.truncation && *options.truncation < 0) {
        throw ValidationError("truncation must be >= 0");
    }
}

std::filesystem::path ComparisonSpec::resolve(const std::filesystem::path& file) const {
    if (file.is_absolute()) return file;
    return base_dir / file;
}

ComparisonSpec parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
    }

    ComparisonSpec spec;
    spec.base_dir = base_dir;
    try {
        if (!doc.is_object()) throw ParseError("manifest must be a JSON object");
        for (const auto& name : doc.at("outputs")) spec.outputs.push_back(name.get<std::string>());
        for (const auto& g : doc.at("groups")) {
            GroupSource group;
            group.label = g.at("label").get<std::string>();
            for (const auto& [name, path] : g.at("files").items()) {
                group.files.emplace(name, std::filesystem::path(path.get<std::string>()));
            }
            const auto n = g.at("n").get<long long>();
            if (n < 0) throw ValidationError("group '" + group.label + "' has negative n");
            group.replications = static_cast<std::size_t>(n);
            spec.groups.push_back(std::move(group));
        }
        if (doc.contains("options")) {
            const auto& opt = doc.at("options");
            if (opt.contains("variance")) spec.options.variance = opt.at("variance").get<double>();
            if (opt.contains("alpha")) spec.options.alpha = opt.at("alpha").get<double>();
            if (opt.contains("truncation") && !opt.at("truncation").is_null()) {
                spec.options.truncation = opt.at("truncation").get<int>();
            }
            if (opt.contains("adjust")) {
                spec.options.adjust = adjust_method_from_string(opt.at("adjust").get<std::string>());
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed manifest: ") + e.what());
    }
    spec.validate();
    return spec;
}

ComparisonSpec load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_manifest(buffer.str(), path.parent_path());
}

std::string render_manifest(const ComparisonSpec& spec) {
    json doc;
    doc["outputs"] = spec.outputs;
    doc["groups"] = json::array();
    for (const auto& g : spec.groups) {
        json files = json::object();
        for (const auto& [name, path] : g.files) files[name] = path.generic_string();
        doc["groups"].push_back({{"label", g.label}, {"files", files}, {"n", g.replications}});
    }
    json options = {{"variance", spec.options.variance},
                    {"alpha", spec.options.alpha},
                    {"adjust", std::string(to_string(spec.options.adjust))}};
    if (spec.options.truncation) options["truncation"] = *spec.options.truncation;
    doc["options"] = options;
    return doc.dump(2) + "\n";
}

OutputMatrix::OutputMatrix(std::string name, Eigen::MatrixXd values, std::vector<std::string> group_of_row)
    : name_(std::move(name)), values_(std::move(values)), group_of_row_(std::move(group_of_row)) {
    if (static_cast<std::size_t>(values_.rows()) != group_of_row_.size()) {
        throw ShapeMismatchError("output '" + name_ + "': " + std::to_string(values_.rows()) +
                                 " rows but " + std::to_string(group_of_row_.size()) + " group labels");
    }
    if (values_.cols() < 2) {
        throw ValidationError("output '" + name_ + "' needs at least 2 iteration columns");
    }
    for (std::size_t r = 0; r < group_of_row_.size(); ++r) {
        const auto& label = group_of_row_[r];
        if (r == 0 || label != group_of_row_[r - 1]) {
            if (std::find(group_order_.begin(), group_order_.end(), label) != group_order_.end()) {
                throw ValidationError("output '" + name_ + "': rows of group '" + label + "' are not contiguous");
            }
            group_order_.push_back(label);
        }
    }
    if (group_order_.size() < 2) {
        throw ValidationError("output '" + name_ + "' needs at least 2 groups");
    }
    for (const auto& label : group_order_) {
        const auto count = std::count(group_of_row_.begin(), group_of_row_.end(), label);
        if (count < 2) {
            throw ValidationError("output '" + name_ + "': group '" + label + "' has fewer than 2 rows");
        }
    }
}

bool operator==(const OutputMatrix& a, const OutputMatrix& b) {
    return a.name_ == b.name_ && a.group_of_row_ == b.group_of_row_ && a.values_.rows() == b.values_.rows() &&
           a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
}

std::vector<std::size_t> OutputMatrix::group_index() const {
    std::vector<std::size_t> idx;
    idx.reserve(group_of_row_.size());
    std::size_t current = 0;
    for (std::size_t r = 0; r < group_of_row_.size(); ++r) {
        if (r > 0 && group_of_row_[r] != group_of_row_[r - 1]) ++current;
        idx.push_back(current);
    }
    return idx;
}

std::vector<double> OutputMatrix::row(Eigen::Index r) const {
    std::vector<double> out(static_cast<std::size_t>(values_.cols()));
    for (Eigen::Index c = 0; c < values_.cols(); ++c) out[static_cast<std::size_t>(c)] = values_(r, c);
    return out;
}

OutputMatrix stack_groups(std::string name, std::span<const std::string> labels,
                          std::span<const Eigen::MatrixXd> blocks) {
    if (labels.size() != blocks.size()) {
        throw ShapeMismatchError("stack_groups: " + std::to_string(labels.size()) + " labels for " +
                                 std::to_string(blocks.size()) + " blocks");
    }
    Eigen::Index rows = 0;
    Eigen::Index cols = blocks.empty() ? 0 : blocks.front().cols();
    for (std::size_t g = 0; g < blocks.size(); ++g) {
        if (blocks[g].rows() == 0) throw EmptyGroupError("group '" + labels[g] + "' has no rows");
        if (blocks[g].cols() != cols) {
            throw RaggedRowsError("output '" + name + "': group '" + labels[g] + "' has " +
                                  std::to_string(blocks[g].cols()) + " columns, expected " + std::to_string(cols));
        }
        rows += blocks[g].rows();
    }
    Eigen::MatrixXd values(rows, cols);
    std::vector<std::string> group_of_row;
    group_of_row.reserve(static_cast<std::size_t>(rows));
    Eigen::Index at = 0;
    for (std::size_t g = 0; g < blocks.size(); ++g) {
        values.middleRows(at, blocks[g].rows()) = blocks[g];
        at += blocks[g].rows();
        group_of_row.insert(group_of_row.end(), static_cast<std::size_t>(blocks[g].rows()), labels[g]);
    }
    return OutputMatrix(std::move(name), std::move(values), std::move(group_of_row));
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view field, const std::filesystem::path& path, std::size_t line, std::size_t col) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc() || ptr != end) {
        throw ParseError(path.string() + ":" + std::to_string(line) + ": field " + std::to_string(col + 1) +
                         " is not a number: '" + std::string(field) + "'");
    }
    return value;
}

}  // namespace

Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        for (;;) {
            const auto comma = view.find(',', start);
            const auto field = view.substr(start, comma == std::string_view::npos ? view.npos : comma - start);
            row.push_back(parse_number(field, path, line_no, row.size()));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw RaggedRowsError(path.string() + ":" + std::to_string(line_no) + ": " + std::to_string(row.size()) +
                                  " columns, expected " + std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    if (rows.empty()) throw EmptyGroupError("'" + path.string() + "' contains no rows");

    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

void write_csv_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& values) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    std::string line;
    char buf[32];
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        line.clear();
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (c > 0) line.push_back(',');
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, values(r, c));
            line.append(buf, ptr);
        }
        line.push_back('\n');
        out << line;
    }
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

OutputMatrix load_output_matrix(const ComparisonSpec& spec, std::string_view output_name) {
    const std::string name(output_name);
    if (std::find(spec.outputs.begin(), spec.outputs.end(), name) == spec.outputs.end()) {
        throw ValidationError("output '" + name + "' is not declared in the manifest");
    }
    std::vector<std::string> labels;
    std::vector<Eigen::MatrixXd> blocks;
    for (const auto& group : spec.groups) {
        const auto it = group.files.find(name);
        if (it == group.files.end()) {
            throw ValidationError("group '" + group.label + "' has no file for output '" + name + "'");
        }
        const auto path = spec.resolve(it->second);
        Eigen::MatrixXd block = read_csv_matrix(path);
        if (static_cast<std::size_t>(block.rows()) != group.replications) {
            throw ValidationError("'" + path.string() + "' has " + std::to_string(block.rows()) +
                                  " rows but group '" + group.label + "' declares " +
                                  std::to_string(group.replications));
        }
        labels.push_back(group.label);
        blocks.push_back(std::move(block));
    }
    return stack_groups(name, labels, blocks);
}

std::vector<double> range_scale(std::span<const double> row) {
    if (row.empty()) throw DegenerateRangeError("cannot range-scale an empty row");
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) throw DegenerateRangeError("constant row (max = min = " + std::to_string(*lo) + ")");
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(row.size());
    std::vector<double> out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = (row[i] - mean) / range;
    return out;
}

OutputMatrix concatenate_outputs(std::span<const OutputMatrix> outputs) {
    if (outputs.empty()) throw ShapeMismatchError("nothing to concatenate");
    const auto& first = outputs.front();
    Eigen::Index width = 0;
    for (const auto& out : outputs) {
        if (out.rows() != first.rows() || out.group_of_row() != first.group_of_row()) {
            throw ShapeMismatchError("output '" + out.name() + "' does not share the row layout of '" +
                                     first.name() + "'");
        }
        width += out.cols();
    }
    Eigen::MatrixXd values(first.rows(), width);
    Eigen::Index offset = 0;
    for (const auto& out : outputs) {
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            std::vector<double> scaled;
            try {
                scaled = range_scale(out.row(r));
            } catch (const DegenerateRangeError& e) {
                throw DegenerateRangeError("output '" + out.name() + "', row " + std::to_string(r) + ": " + e.what());
            }
            for (Eigen::Index c = 0; c < out.cols(); ++c) values(r, offset + c) = scaled[static_cast<std::size_t>(c)];
        }
        offset += out.cols();
    }
    return OutputMatrix(std::string(kConcatenatedName), std::move(values), first.group_of_row());
}

}  // namespace simalign
