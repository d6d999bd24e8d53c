#include "ppnn/dataset.hpp"

#include <stdexcept>

#include "binary_io.hpp"
#include "json_convert.hpp"

namespace ppnn {

namespace {
constexpr std::string_view kDatasetMagic = "PPNNDATA";
}

std::size_t TrainingSet::usable_rows() const {
  std::size_t n = 0;
  for (auto f : flags) n += (f & kRowFailed) ? 0 : 1;
  return n;
}

Examples TrainingSet::usable() const {
  const auto n = static_cast<Eigen::Index>(usable_rows());
  Examples out;
  out.curves.resize(data.curves.rows(), n);
  out.counts.resize(n);
  out.targets.resize(data.targets.rows(), n);
  Eigen::Index j = 0;
  for (std::size_t i = 0; i < rows(); ++i) {
    if (flags[i] & kRowFailed) continue;
    const auto col = static_cast<Eigen::Index>(i);
    out.curves.col(j) = data.curves.col(col);
    out.counts(j) = data.counts(col);
    out.targets.col(j) = data.targets.col(col);
    ++j;
  }
  return out;
}

TrainingSet TrainingSet::head(std::size_t n) const {
  if (n > rows()) throw std::invalid_argument("TrainingSet::head: only " + std::to_string(rows()) + " rows");
  TrainingSet out;
  out.spec = spec;
  out.window = window;
  out.r = r;
  out.ranges = ranges;
  out.seed = seed;
  const auto cols = static_cast<Eigen::Index>(n);
  out.data.curves = data.curves.leftCols(cols);
  out.data.counts = data.counts.head(cols);
  out.data.targets = data.targets.leftCols(cols);
  out.flags.assign(flags.begin(), flags.begin() + static_cast<std::ptrdiff_t>(n));
  for (const auto& f : failures)
    if (f.row < n) out.failures.push_back(f);
  return out;
}

void save_dataset(const std::filesystem::path& path, const TrainingSet& set) {
  const auto m = set.r.size();
  const auto k = set.ranges.size();
  const auto n = set.rows();
  if (static_cast<std::size_t>(set.data.curves.rows()) != m || static_cast<std::size_t>(set.data.curves.cols()) != n ||
      static_cast<std::size_t>(set.data.counts.size()) != n || static_cast<std::size_t>(set.data.targets.rows()) != k ||
      static_cast<std::size_t>(set.data.targets.cols()) != n)
    throw std::invalid_argument("save_dataset: inconsistent training set shape");

  nlohmann::json header;
  header["model"] = detail::to_json(set.spec);
  header["window"] = detail::to_json(set.window);
  header["ranges"] = detail::to_json(set.ranges);
  header["seed"] = set.seed;
  header["rows"] = n;
  header["curve_length"] = m;
  header["parameters"] = k;
  auto failures = nlohmann::json::array();
  for (const auto& f : set.failures) failures.push_back({{"row", f.row}, {"message", f.message}});
  header["failures"] = failures;

  detail::BinaryWriter w;
  w.bytes(kDatasetMagic.data(), kDatasetMagic.size());
  w.value<std::uint32_t>(kDatasetFormatVersion);
  w.string(header.dump());
  w.doubles(set.r);
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    w.bytes(set.data.curves.col(col).data(), m * sizeof(double));
    w.value<double>(set.data.counts(col));
    w.bytes(set.data.targets.col(col).data(), k * sizeof(double));
    w.value<std::uint8_t>(set.flags[i]);
  }
  w.write_file(path);
}

TrainingSet load_dataset(const std::filesystem::path& path, std::size_t expected_curve_length) {
  detail::BinaryReader rd(path, kDatasetMagic, kDatasetFormatVersion);
  TrainingSet set;
  std::size_t n = 0, m = 0, k = 0;
  try {
    const auto header = nlohmann::json::parse(rd.string());
    set.spec = detail::model_from_json(header.at("model"));
    set.window = detail::window_from_json(header.at("window"));
    set.ranges = detail::ranges_from_json(header.at("ranges"));
    set.seed = header.at("seed").get<std::uint64_t>();
    n = header.at("rows").get<std::size_t>();
    m = header.at("curve_length").get<std::size_t>();
    k = header.at("parameters").get<std::size_t>();
    for (const auto& f : header.at("failures"))
      set.failures.push_back({f.at("row").get<std::size_t>(), f.at("message").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(path.string() + ": bad header: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw CorruptFile(path.string() + ": bad header: " + e.what());
  }
  if (k != set.ranges.size() || k != parameter_count(set.spec.kind))
    throw CorruptFile(path.string() + ": parameter count does not match the model");
  if (expected_curve_length != 0 && m != expected_curve_length)
    throw FileFormatError(path.string() + ": curve length " + std::to_string(m) + ", expected " +
                          std::to_string(expected_curve_length));

  if (rd.value<std::uint64_t>() != m) throw CorruptFile(path.string() + ": r grid length mismatch");
  set.r.resize(m);
  rd.bytes(set.r.data(), m * sizeof(double));

  const std::size_t row_bytes = (m + 1 + k) * sizeof(double) + 1;
  if (rd.remaining() != n * row_bytes) throw CorruptFile(path.string() + ": row data size mismatch");
  const auto cols = static_cast<Eigen::Index>(n);
  set.data.curves.resize(static_cast<Eigen::Index>(m), cols);
  set.data.counts.resize(cols);
  set.data.targets.resize(static_cast<Eigen::Index>(k), cols);
  set.flags.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    rd.bytes(set.data.curves.col(col).data(), m * sizeof(double));
    set.data.counts(col) = rd.value<double>();
    rd.bytes(set.data.targets.col(col).data(), k * sizeof(double));
    set.flags[i] = rd.value<std::uint8_t>();
  }
  return set;
}

}  // namespace ppnn
