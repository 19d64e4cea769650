#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace arsent {

/// 100 * fraction rounded half-up to two decimals.
double to_percent(double fraction);

/// "87.63" style rendering of a percentage.
std::string format_percent(double pct);

struct ReportRow {
  std::string config;
  std::size_t feature_count = 0;
  double accuracy_pct = 0.0;
  double precision_pct = 0.0;
  double recall_pct = 0.0;

  bool operator==(const ReportRow&) const = default;
};

/// One results table. Rows stay in the order they were declared in the grid.
struct ReportTable {
  std::string title;
  std::string key_header = "Configuration";
  bool show_feature_count = false;
  std::vector<ReportRow> rows;

  /// Appends a row from metric fractions in [0, 1].
  void add(std::string config, std::size_t feature_count, double accuracy, double precision, double recall);

  bool operator==(const ReportTable&) const = default;
};

inline constexpr std::string_view kTableCsvHeader = "config,feature_count,accuracy_pct,precision_pct,recall_pct";

void write_table_csv(std::ostream& out, const ReportTable& table);

/// Parses write_table_csv output. Title and headers are not part of the CSV.
ReportTable read_table_csv(std::istream& in);

nlohmann::json to_json(const ReportTable& table);
ReportTable table_from_json(const nlohmann::json& j);

/// Aligned plain-text rendering.
void render_table(std::ostream& out, const ReportTable& table);

/// GitHub-flavoured markdown rendering.
void render_markdown(std::ostream& out, const ReportTable& table);

}  // namespace arsent
