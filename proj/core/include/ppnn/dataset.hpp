#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ppnn/geometry.hpp"
#include "ppnn/model.hpp"
#include "ppnn/nn.hpp"

namespace ppnn {

struct ParamRange {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(const ParamRange&, const ParamRange&) = default;
};

enum RowFlag : std::uint8_t {
  kRowOk = 0,
  kRowDegenerate = 1,  // fewer than two points; zero curve
  kRowFailed = 2,      // simulation failed twice; row holds no data
};

struct RowFailure {
  std::size_t row = 0;
  std::string message;
};

// Raw (unstandardized) simulation output. Column i of data holds row i;
// row i was simulated from substream(seed, i).
struct TrainingSet {
  ModelSpec spec;
  Window window = Window::unit_square();
  std::vector<double> r;
  std::vector<ParamRange> ranges;
  std::uint64_t seed = 0;
  Examples data;  // curves are centred L estimates, targets are theta
  std::vector<std::uint8_t> flags;
  std::vector<RowFailure> failures;

  std::size_t rows() const { return flags.size(); }
  std::size_t usable_rows() const;

  // Rows not flagged as failed, in order.
  Examples usable() const;
  // First n rows (nested subsets for size studies).
  TrainingSet head(std::size_t n) const;
};

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

// Binary layout, little-endian:
//   "PPNNDATA" | u32 version | u64 len + JSON header (model, simulation
//   settings, window, ranges, seed, rows, curve length, failures) |
//   u64 m + f64[m] r grid | per row: f64[m] curve, f64 count, f64[k] theta,
//   u8 flag | u64 FNV-1a checksum of all preceding bytes.
// A nonzero expected_curve_length rejects files built on another grid.
void save_dataset(const std::filesystem::path& path, const TrainingSet& set);
TrainingSet load_dataset(const std::filesystem::path& path, std::size_t expected_curve_length = 0);

}  // namespace ppnn
