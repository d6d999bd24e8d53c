#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppnn/errors.hpp"
#include "ppnn/geometry.hpp"
#include "ppnn/sumstats.hpp"

namespace ppnn {

// "x_min,x_max,y_min,y_max".
Window parse_window(std::string_view text);

// Sidecar holding {"window": [x_min, x_max, y_min, y_max]} next to a pattern
// file: "<pattern path>.json".
std::filesystem::path window_sidecar_path(const std::filesystem::path& pattern);

// CSV with a header naming at least the columns x and y; other columns are
// ignored. The window is taken from `window` if given, else from the sidecar.
// When mark_column is non-empty only rows whose value in that column equals
// mark_value are kept.
PointPattern read_pattern_csv(const std::filesystem::path& path, std::optional<Window> window = std::nullopt,
                              const std::string& mark_column = "", const std::string& mark_value = "");

// Writes x,y rows with full double precision plus the window sidecar.
void write_pattern_csv(const std::filesystem::path& path, const PointPattern& p);

// The 125 x 188 m frost-shake oak stand.
Window oak_window();
// Reads an export of the oak data (columns x, y and optionally a mark
// column); see the README for how to produce it.
PointPattern load_oak_csv(const std::filesystem::path& path, const std::string& mark_column = "",
                          const std::string& mark_value = "");

// Columns r,value,valid.
void write_curve_csv(const std::filesystem::path& path, const SummaryCurve& c);

// Minimal CSV writer: header once, then rows of doubles in their shortest
// round-trip form.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace ppnn
