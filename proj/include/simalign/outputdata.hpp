#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace simalign {

// Name given to the range-scaled concatenation of all outputs.
inline constexpr std::string_view kConcatenatedName = "A~";

enum class AdjustMethod { none, bonferroni, holm, weighted };

std::string_view to_string(AdjustMethod method);
AdjustMethod adjust_method_from_string(std::string_view name);

struct ComparisonOptions {
    double variance = 0.9;  // fraction of variance the MANOVA subspace must explain
    double alpha = 0.05;
    std::optional<int> truncation;  // steady-state truncation point, focal measures only
    AdjustMethod adjust = AdjustMethod::weighted;

    friend bool operator==(const ComparisonOptions&, const ComparisonOptions&) = default;
};

struct GroupSource {
    std::string label;
    std::map<std::string, std::filesystem::path> files;  // output name -> CSV
    std::size_t replications = 0;

    friend bool operator==(const GroupSource&, const GroupSource&) = default;
};

// Resolved inputs of one comparison experiment. File paths are absolute or
// relative to base_dir.
struct ComparisonSpec {
    std::vector<std::string> outputs;
    std::vector<GroupSource> groups;
    ComparisonOptions options;
    std::filesystem::path base_dir;

    // Throws ValidationError on any violated invariant.
    void validate() const;
    std::filesystem::path resolve(const std::filesystem::path& file) const;

    friend bool operator==(const ComparisonSpec&, const ComparisonSpec&) = default;
};

ComparisonSpec parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);
ComparisonSpec load_manifest(const std::filesystem::path& path);
std::string render_manifest(const ComparisonSpec& spec);

// One output across replications: rows are replications grouped in
// contiguous blocks by implementation, columns are iterations 0..m.
class OutputMatrix {
public:
    OutputMatrix(std::string name, Eigen::MatrixXd values, std::vector<std::string> group_of_row);

    const std::string& name() const { return name_; }
    const Eigen::MatrixXd& values() const { return values_; }
    const std::vector<std::string>& group_of_row() const { return group_of_row_; }
    const std::vector<std::string>& group_order() const { return group_order_; }

    Eigen::Index rows() const { return values_.rows(); }
    Eigen::Index cols() const { return values_.cols(); }
    // Group index (into group_order) of every row.
    std::vector<std::size_t> group_index() const;
    std::vector<double> row(Eigen::Index r) const;

    friend bool operator==(const OutputMatrix& a, const OutputMatrix& b);

private:
    std::string name_;
    Eigen::MatrixXd values_;
    std::vector<std::string> group_of_row_;
    std::vector<std::string> group_order_;
};

// Stacks per-group blocks (in the given order) into one matrix.
OutputMatrix stack_groups(std::string name, std::span<const std::string> labels,
                          std::span<const Eigen::MatrixXd> blocks);

Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& values);

OutputMatrix load_output_matrix(const ComparisonSpec& spec, std::string_view output_name);

// (row - mean) / (max - min). Throws DegenerateRangeError on a constant row.
std::vector<double> range_scale(std::span<const double> row);

// Row-wise concatenation of the range-scaled rows of every output.
OutputMatrix concatenate_outputs(std::span<const OutputMatrix> outputs);

}  // namespace simalign
