#include "ppnn/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "json_convert.hpp"

namespace ppnn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = line.find(sep);
    out.push_back(trim(line.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    line.remove_prefix(pos + 1);
  }
  return out;
}

double parse_double(std::string_view s, const std::string& where) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FileFormatError(where + ": not a number: '" + std::string(s) + "'");
  return v;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

Window parse_window(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 4) throw std::invalid_argument("window needs x_min,x_max,y_min,y_max");
  double v[4];
  for (int i = 0; i < 4; ++i) v[i] = parse_double(parts[static_cast<std::size_t>(i)], "window");
  return {v[0], v[1], v[2], v[3]};
}

std::filesystem::path window_sidecar_path(const std::filesystem::path& pattern) {
  return std::filesystem::path(pattern.string() + ".json");
}

PointPattern read_pattern_csv(const std::filesystem::path& path, std::optional<Window> window,
                              const std::string& mark_column, const std::string& mark_value) {
  if (!window) {
    const auto sidecar = window_sidecar_path(path);
    std::ifstream in(sidecar);
    if (!in) throw FileFormatError(path.string() + ": no window given and no sidecar " + sidecar.string());
    try {
      window = detail::window_from_json(nlohmann::json::parse(in).at("window"));
    } catch (const nlohmann::json::exception& e) {
      throw FileFormatError(sidecar.string() + ": " + e.what());
    }
  }

  std::ifstream in(path);
  if (!in) throw FileFormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FileFormatError(path.string() + ": empty file");
  const char sep = line.find(',') != std::string::npos ? ',' : (line.find(';') != std::string::npos ? ';' : '\t');
  const auto header = split(line, sep);
  auto column = [&](std::string_view name) -> std::ptrdiff_t {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const auto cx = column("x"), cy = column("y");
  if (cx < 0 || cy < 0) throw FileFormatError(path.string() + ": header must name columns x and y");
  const auto cm = mark_column.empty() ? -1 : column(mark_column);
  if (!mark_column.empty() && cm < 0) throw FileFormatError(path.string() + ": no column '" + mark_column + "'");

  std::vector<Point> points;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line, sep);
    const auto need = static_cast<std::size_t>(std::max({cx, cy, cm})) + 1;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (f.size() < need) throw FileFormatError(where + ": too few columns");
    if (cm >= 0 && f[static_cast<std::size_t>(cm)] != mark_value) continue;
    points.push_back({parse_double(f[static_cast<std::size_t>(cx)], where),
                      parse_double(f[static_cast<std::size_t>(cy)], where)});
  }
  return PointPattern(std::move(points), *window);
}

void write_pattern_csv(const std::filesystem::path& path, const PointPattern& p) {
  std::ofstream out(path);
  if (!out) throw FileFormatError("cannot open " + path.string() + " for writing");
  out << "x,y\n";
  for (const auto& u : p.points()) out << format_double(u.x) << ',' << format_double(u.y) << '\n';
  std::ofstream side(window_sidecar_path(path));
  side << nlohmann::json{{"window", detail::to_json(p.window())}}.dump() << '\n';
  if (!out || !side) throw FileFormatError("write failed: " + path.string());
}

Window oak_window() { return {0.0, 125.0, 0.0, 188.0}; }

PointPattern load_oak_csv(const std::filesystem::path& path, const std::string& mark_column,
                          const std::string& mark_value) {
  return read_pattern_csv(path, oak_window(), mark_column, mark_value);
}

void write_curve_csv(const std::filesystem::path& path, const SummaryCurve& c) {
  std::ofstream out(path);
  if (!out) throw FileFormatError("cannot open " + path.string() + " for writing");
  out << "r,value,valid\n";
  for (std::size_t k = 0; k < c.size(); ++k)
    out << format_double(c.r[k]) << ',' << format_double(c.values[k]) << ',' << (c.valid_at(k) ? 1 : 0) << '\n';
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw FileFormatError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw std::invalid_argument("CsvWriter: wrong number of columns");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << '\n';
}

}  // namespace ppnn
