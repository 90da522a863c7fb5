#include "vtoldock/records.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "vtoldock/errors.hpp"
#include "vtoldock/io.hpp"

namespace vtoldock {

std::vector<std::string> log_columns(LogKind kind) {
  std::vector<std::string> cols{"episode", "total_reward", "mean_loss",
                                "steps",   "impact_velocity", "landed",
                                "aborted", "epsilon"};
  if (kind == LogKind::policy) {
    cols.emplace_back("actor_loss");
    cols.emplace_back("critic_loss");
  }
  return cols;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string to_csv(const std::vector<EpisodeRecord>& log, LogKind kind) {
  std::ostringstream out;
  const auto cols = log_columns(kind);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : log) {
    out << r.episode << ',' << format_double(r.total_reward) << ','
        << format_double(r.mean_loss) << ',' << r.steps << ','
        << format_double(r.impact_velocity) << ',' << (r.landed ? 1 : 0) << ','
        << (r.aborted ? 1 : 0) << ',' << format_double(r.epsilon);
    if (kind == LogKind::policy)
      out << ',' << format_double(r.actor_loss) << ',' << format_double(r.critic_loss);
    out << '\n';
  }
  return out.str();
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ConfigError("missing column '" + name + "'");
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("bad numeric cell '" + cell + "'", line_no);
  return v;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw ParseError("row has " + std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(t.header.size()),
                       line_no);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_cell(c, line_no));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ParseError("empty CSV file", 0);
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(io::read_file(path)); }

}  // namespace vtoldock
