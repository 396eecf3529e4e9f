#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace depthpatch {

/// One row of the flattened report. Column order is fixed.
struct ReportRow {
  std::string run_id;
  std::string model;
  std::string mode;
  double scale = 0.0;
  long long placement_seed = 0;
  std::string defense = "none";
  double defense_param = 0.0;
  double E_d = 0.0;
  double R_a = 0.0;
  double ssim = 0.0;
  std::string units;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

std::string report_csv_header();
std::string to_csv_line(const ReportRow& row);
/// Parses a CSV produced by write_report_csv (header line required).
std::vector<ReportRow> parse_report_csv(const std::string& text);
std::string to_csv(const std::vector<ReportRow>& rows);

struct SceneBreakdown {
  std::string identifier;
  double E_d = 0.0;
  double R_a = 0.0;
};

struct AttackReport {
  std::string run_id;
  double E_d = 0.0;
  double R_a = 0.0;
  double ssim = 0.0;
  double patch_scale = 0.0;
  std::string mode;
  std::string model;
  std::string units;
  std::string reference;  // "benign" or "clean"
  std::string config_hash;
  unsigned long long seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::vector<SceneBreakdown> scenes;
  std::vector<ReportRow> rows;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
};

}  // namespace depthpatch
