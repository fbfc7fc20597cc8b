#include "dynmis/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace dynmis {

using nlohmann::json;

namespace {

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

ReportFormat parse_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "table") return ReportFormat::Table;
  throw Error(ErrorCode::InvalidArgument, "unknown report format '" + std::string(text) + "'");
}

json to_json(const MethodResult& r) {
  json records = json::array();
  for (const auto& e : r.records)
    records.push_back({{"t", e.t},
                       {"set_size", e.set_size},
                       {"oracle_size", e.oracle_size},
                       {"ratio", e.ratio},
                       {"seconds", e.seconds},
                       {"touched_memory_nodes", e.touched_memory_nodes},
                       {"touched_estimate_nodes", e.touched_estimate_nodes},
                       {"oracle_optimal", e.oracle_optimal}});
  const auto& a = r.aggregates;
  return {{"method", r.method},
          {"records", records},
          {"aggregates",
           {{"defined", a.defined},
            {"ratio_mean", a.ratio_mean},
            {"ratio_std", a.ratio_std},
            {"mean_seconds", a.mean_seconds},
            {"peak_rss_bytes", a.peak_rss_bytes},
            {"oracle_timeouts", a.oracle_timeouts}}}};
}

MethodResult method_result_from_json(const json& j) {
  MethodResult r;
  try {
    r.method = j.at("method").get<std::string>();
    for (const auto& e : j.at("records"))
      r.records.push_back({e.at("t").get<std::size_t>(), e.at("set_size").get<std::size_t>(),
                           e.at("oracle_size").get<std::size_t>(), e.at("ratio").get<double>(),
                           e.at("seconds").get<double>(), e.at("touched_memory_nodes").get<std::size_t>(),
                           e.at("touched_estimate_nodes").get<std::size_t>(), e.at("oracle_optimal").get<bool>()});
    const auto& a = j.at("aggregates");
    r.aggregates = {a.at("defined").get<bool>(),         a.at("ratio_mean").get<double>(),
                    a.at("ratio_std").get<double>(),     a.at("mean_seconds").get<double>(),
                    a.at("peak_rss_bytes").get<std::uint64_t>(), a.at("oracle_timeouts").get<std::size_t>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
  return r;
}

std::vector<MethodResult> results_from_json(const json& j) {
  std::vector<MethodResult> out;
  for (const auto& item : j.at("results")) out.push_back(method_result_from_json(item));
  return out;
}

std::string emit_report(std::span<const MethodResult> results, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Json: {
      json arr = json::array();
      for (const auto& r : results) arr.push_back(to_json(r));
      out << json{{"results", arr}, {"memory_note", "peak_rss_bytes is process-wide resident memory"}}.dump(2)
          << '\n';
      break;
    }
    case ReportFormat::Csv:
      out << "method,t,size,oracle,ratio,seconds\n";
      for (const auto& r : results)
        for (const auto& e : r.records)
          out << r.method << ',' << e.t << ',' << e.set_size << ',' << e.oracle_size << ',' << shortest(e.ratio)
              << ',' << shortest(e.seconds) << '\n';
      break;
    case ReportFormat::Table: {
      std::vector<const MethodResult*> order;
      for (const auto& r : results) order.push_back(&r);
      std::stable_sort(order.begin(), order.end(), [](const MethodResult* a, const MethodResult* b) {
        if (a->aggregates.defined != b->aggregates.defined) return a->aggregates.defined;
        return a->aggregates.ratio_mean > b->aggregates.ratio_mean;
      });
      char line[160];
      std::snprintf(line, sizeof line, "%-10s %-18s %-12s %-8s %s\n", "method", "ratio", "s/g", "events",
                    "oracle timeouts");
      out << line;
      for (const auto* r : order) {
        const auto& a = r->aggregates;
        if (!a.defined) {
          std::snprintf(line, sizeof line, "%-10s %-18s %-12s %-8zu %s\n", r->method.c_str(), "n/a (empty)", "n/a",
                        r->records.size(), "-");
        } else {
          const std::string ratio = fixed(a.ratio_mean, 2) + "+-" + fixed(a.ratio_std, 3);
          const std::string sec = "(" + fixed(a.mean_seconds, 6) + ")";
          std::snprintf(line, sizeof line, "%-10s %-18s %-12s %-8zu %zu\n", r->method.c_str(), ratio.c_str(),
                        sec.c_str(), r->records.size(), a.oracle_timeouts);
        }
        out << line;
      }
      if (!results.empty())
        out << "peak RSS (process-wide, not comparable to GPU training memory): "
            << results.front().aggregates.peak_rss_bytes / (1024 * 1024) << " MiB\n";
      break;
    }
  }
  return out.str();
}

}  // namespace dynmis
