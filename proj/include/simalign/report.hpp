#pragma once

#include <string>
#include <string_view>

#include "simalign/comparator.hpp"
#include "simalign/focalmeasures.hpp"

namespace simalign {

// "0.213" for p >= 0.001, "4.56e-05" down to 1e-08, "<1e-08" below.
std::string format_p(double p);
// "**" for p < 0.01, "*" for p < 0.05, "" otherwise.
std::string_view significance_mark(double p);
// format_p followed by the mark.
std::string marked_p(double p);

// Machine reports: JSON that parses back into an equal structure.
std::string render_json(const ModelComparison& mc);
ModelComparison parse_comparison_json(std::string_view text);
std::string render_json(const FocalMeasureReport& report);
FocalMeasureReport parse_fm_report_json(std::string_view text);

// Human reports: fixed-width tables.
std::string render_table(const ModelComparison& mc);
std::string render_table(const FocalMeasureReport& report);

// output,group,pc1,pc2 for every output and A~.
std::string render_scatter_csv(const ModelComparison& mc);

}  // namespace simalign
