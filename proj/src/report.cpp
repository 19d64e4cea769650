#include "arsent/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "arsent/error.hpp"

namespace arsent {
namespace {

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno) {
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
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw DataError("table line " + std::to_string(lineno) + ": unterminated quote");
  return fields;
}

template <class T>
T parse_number(const std::string& s, std::size_t lineno, std::string_view what) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("table line " + std::to_string(lineno) + ": bad " + std::string(what) + " '" + s + "'");
  }
  return v;
}

}  // namespace

double to_percent(double fraction) {
  // The epsilon keeps exact halves such as 0.87625 from rounding down after
  // the multiplication lands a hair below .5.
  return std::floor(fraction * 10000.0 + 0.5 + 1e-9) / 100.0;
}

std::string format_percent(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", pct);
  return buf;
}

void ReportTable::add(std::string config, std::size_t feature_count, double accuracy, double precision,
                      double recall) {
  rows.push_back({std::move(config), feature_count, to_percent(accuracy), to_percent(precision),
                  to_percent(recall)});
}

void write_table_csv(std::ostream& out, const ReportTable& table) {
  out << kTableCsvHeader << '\n';
  for (const auto& r : table.rows) {
    out << quote_field(r.config) << ',' << r.feature_count << ',' << format_percent(r.accuracy_pct) << ','
        << format_percent(r.precision_pct) << ',' << format_percent(r.recall_pct) << '\n';
  }
}

ReportTable read_table_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("table: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTableCsvHeader) throw DataError("table: unexpected header '" + line + "'");
  ReportTable table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line, lineno);
    if (f.size() != 5) throw DataError("table line " + std::to_string(lineno) + ": expected 5 fields");
    ReportRow r;
    r.config = f[0];
    r.feature_count = parse_number<std::size_t>(f[1], lineno, "feature_count");
    r.accuracy_pct = parse_number<double>(f[2], lineno, "accuracy_pct");
    r.precision_pct = parse_number<double>(f[3], lineno, "precision_pct");
    r.recall_pct = parse_number<double>(f[4], lineno, "recall_pct");
    table.rows.push_back(std::move(r));
  }
  return table;
}

nlohmann::json to_json(const ReportTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"config", r.config},
                    {"feature_count", r.feature_count},
                    {"accuracy_pct", r.accuracy_pct},
                    {"precision_pct", r.precision_pct},
                    {"recall_pct", r.recall_pct}});
  }
  return {{"title", table.title},
          {"key_header", table.key_header},
          {"show_feature_count", table.show_feature_count},
          {"rows", rows}};
}

ReportTable table_from_json(const nlohmann::json& j) {
  try {
    ReportTable t;
    t.title = j.value("title", "");
    t.key_header = j.value("key_header", "Configuration");
    t.show_feature_count = j.value("show_feature_count", false);
    for (const auto& r : j.at("rows")) {
      t.rows.push_back({r.at("config").get<std::string>(), r.at("feature_count").get<std::size_t>(),
                        r.at("accuracy_pct").get<double>(), r.at("precision_pct").get<double>(),
                        r.at("recall_pct").get<double>()});
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("table json: ") + e.what());
  }
}

namespace {

struct Grid {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;
};

Grid to_grid(const ReportTable& table) {
  Grid g;
  g.header = {table.key_header};
  if (table.show_feature_count) g.header.push_back("Feature No.");
  for (const char* h : {"Accuracy (%)", "Precision (%)", "Recall (%)"}) g.header.push_back(h);
  for (const auto& r : table.rows) {
    std::vector<std::string> row{r.config};
    if (table.show_feature_count) row.push_back(std::to_string(r.feature_count));
    row.push_back(format_percent(r.accuracy_pct));
    row.push_back(format_percent(r.precision_pct));
    row.push_back(format_percent(r.recall_pct));
    g.cells.push_back(std::move(row));
  }
  return g;
}

// Display width in code points; good enough for Latin and Arabic labels.
std::size_t width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

}  // namespace

void render_table(std::ostream& out, const ReportTable& table) {
  const Grid g = to_grid(table);
  std::vector<std::size_t> w(g.header.size());
  for (std::size_t c = 0; c < w.size(); ++c) {
    w[c] = width(g.header[c]);
    for (const auto& row : g.cells) w[c] = std::max(w[c], width(row[c]));
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string pad(w[c] - width(cells[c]), ' ');
      // First column left-aligned, numbers right-aligned.
      out << (c ? "  " : "") << (c ? pad + cells[c] : cells[c] + pad);
    }
    out << '\n';
  };
  if (!table.title.empty()) out << table.title << '\n';
  line(g.header);
  std::size_t total = 0;
  for (auto x : w) total += x;
  out << std::string(total + 2 * (w.size() - 1), '-') << '\n';
  for (const auto& row : g.cells) line(row);
}

void render_markdown(std::ostream& out, const ReportTable& table) {
  const Grid g = to_grid(table);
  if (!table.title.empty()) out << "**" << table.title << "**\n\n";
  out << '|';
  for (const auto& h : g.header) out << ' ' << h << " |";
  out << "\n|";
  for (std::size_t c = 0; c < g.header.size(); ++c) out << (c ? " ---: |" : " --- |");
  out << '\n';
  for (const auto& row : g.cells) {
    out << '|';
    for (const auto& cell : row) out << ' ' << cell << " |";
    out << '\n';
  }
}

}  // namespace arsent
