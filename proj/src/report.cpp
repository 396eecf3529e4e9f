#include "depthpatch/report.hpp"

#include <charconv>
#include <sstream>

#include "depthpatch/errors.hpp"

namespace depthpatch {

namespace {

constexpr const char* kColumns[] = {"run_id", "model", "mode", "scale", "placement_seed", "defense",
                                    "defense_param", "E_d", "R_a", "ssim", "units"};
constexpr std::size_t kColumnCount = std::size(kColumns);

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, result.ptr);
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw InvalidArgument("unterminated quote in report CSV");
  return fields;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("bad number in report CSV: '" + s + "'");
  }
  return v;
}

long long parse_int(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("bad integer in report CSV: '" + s + "'");
  }
  return v;
}

}  // namespace

std::string report_csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    if (i) out += ',';
    out += kColumns[i];
  }
  return out;
}

std::string to_csv_line(const ReportRow& row) {
  std::ostringstream out;
  out << quote(row.run_id) << ',' << quote(row.model) << ',' << quote(row.mode) << ','
      << format_double(row.scale) << ',' << row.placement_seed << ',' << quote(row.defense) << ','
      << format_double(row.defense_param) << ',' << format_double(row.E_d) << ','
      << format_double(row.R_a) << ',' << format_double(row.ssim) << ',' << quote(row.units);
  return out.str();
}

std::string to_csv(const std::vector<ReportRow>& rows) {
  std::string out = report_csv_header() + "\n";
  for (const ReportRow& row : rows) out += to_csv_line(row) + "\n";
  return out;
}

std::vector<ReportRow> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("report CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != report_csv_header()) throw InvalidArgument("unexpected report CSV header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != kColumnCount) throw InvalidArgument("report CSV row has the wrong column count");
    rows.push_back({f[0], f[1], f[2], parse_double(f[3]), parse_int(f[4]), f[5], parse_double(f[6]),
                    parse_double(f[7]), parse_double(f[8]), parse_double(f[9]), f[10]});
  }
  return rows;
}

nlohmann::json AttackReport::to_json() const {
  nlohmann::json scene_list = nlohmann::json::array();
  for (const SceneBreakdown& s : scenes) {
    scene_list.push_back({{"identifier", s.identifier}, {"E_d", s.E_d}, {"R_a", s.R_a}});
  }
  nlohmann::json row_list = nlohmann::json::array();
  for (const ReportRow& r : rows) {
    row_list.push_back({{"run_id", r.run_id},
                        {"model", r.model},
                        {"mode", r.mode},
                        {"scale", r.scale},
                        {"placement_seed", r.placement_seed},
                        {"defense", r.defense},
                        {"defense_param", r.defense_param},
                        {"E_d", r.E_d},
                        {"R_a", r.R_a},
                        {"ssim", r.ssim},
                        {"units", r.units}});
  }
  return {{"run_id", run_id},
          {"E_d", E_d},
          {"R_a", R_a},
          {"ssim", ssim},
          {"patch_scale", patch_scale},
          {"mode", mode},
          {"model", model},
          {"units", units},
          {"reference", reference},
          {"config_hash", config_hash},
          {"seed", seed},
          {"config", config},
          {"scenes", scene_list},
          {"rows", row_list},
          {"extra", extra}};
}

}  // namespace depthpatch
