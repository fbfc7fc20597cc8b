#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dynmis/bench.hpp"

namespace dynmis {

enum class ReportFormat { Json, Csv, Table };

ReportFormat parse_format(std::string_view text);

/// JSON is lossless; CSV has the header `method,t,size,oracle,ratio,seconds`;
/// the table lists one line per method sorted by mean ratio, descending.
std::string emit_report(std::span<const MethodResult> results, ReportFormat format);

nlohmann::json to_json(const MethodResult& r);
MethodResult method_result_from_json(const nlohmann::json& j);
std::vector<MethodResult> results_from_json(const nlohmann::json& j);

}  // namespace dynmis
