// Copyright 2026 The svd-surrogate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "surrogate/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json_util.hpp"
#include "surrogate/error.hpp"

namespace surrogate {

static_assert(std::endian::native == std::endian::little, ".smx I/O assumes a little-endian host");

// ParameterSpace --------------------------------------------------------------

ParameterSpace::ParameterSpace(std::vector<ParameterDim> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("parameter space needs at least one dim");
  std::set<std::string> seen;
  for (const auto& d : dims_) {
    if (!seen.insert(d.name).second) throw std::invalid_argument(fmt::format("duplicate parameter name '{}'", d.name));
    if (!std::isfinite(d.lower) || !std::isfinite(d.upper) || !(d.lower < d.upper)) {
      throw std::invalid_argument(
          fmt::format("parameter '{}' needs finite lower < upper, got [{}, {}]", d.name, d.lower, d.upper));
    }
  }
}

ParameterSpace ParameterSpace::unit_cube(const std::vector<std::string>& names) {
  std::vector<ParameterDim> dims;
  dims.reserve(names.size());
  for (const auto& n : names) dims.push_back({n, 0.0, 1.0});
  return ParameterSpace(std::move(dims));
}

std::vector<std::string> ParameterSpace::names() const {
  std::vector<std::string> out;
  out.reserve(dims_.size());
  for (const auto& d : dims_) out.push_back(d.name);
  return out;
}

ParameterSpace ParameterSpace::with_bounds(std::size_t i, double lower, double upper) const {
  auto dims = dims_;
  dims.at(i).lower = lower;
  dims.at(i).upper = upper;
  return ParameterSpace(std::move(dims));
}

// DesignMatrix / OutputMatrix ---------------------------------------------------

DesignMatrix::DesignMatrix(ParameterSpace space, Eigen::MatrixXd values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (values_.rows() < 1) throw std::invalid_argument("design matrix needs at least one row");
  if (static_cast<std::size_t>(values_.cols()) != space_.size()) {
    throw DataError(fmt::format("design has {} columns but the parameter space has {} dims", values_.cols(),
                                space_.size()));
  }
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    const auto& dim = space_[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      const double v = values_(i, j);
      if (!std::isfinite(v)) throw DataError(fmt::format("non-finite design entry at row {}, col {}", i, j));
      if (v < dim.lower || v > dim.upper) {
        throw DataError(fmt::format("design entry {} at row {}, col {} ('{}') is outside [{}, {}]", v, i, j, dim.name,
                                    dim.lower, dim.upper));
      }
    }
  }
}

OutputIndexMap::OutputIndexMap(std::size_t n_loc, std::size_t n_year) : n_loc_(n_loc), n_year_(n_year) {
  if (n_loc == 0 || n_year == 0) throw std::invalid_argument("output index map needs n_loc, n_year >= 1");
}

OutputMatrix::OutputMatrix(Eigen::MatrixXd values, OutputIndexMap index_map)
    : values_(std::move(values)), index_map_(index_map) {
  if (static_cast<std::size_t>(values_.cols()) != index_map_.size()) {
    throw DataError(fmt::format("output matrix has {} columns but n_loc x n_year = {} x {} = {}", values_.cols(),
                                index_map_.n_loc(), index_map_.n_year(), index_map_.size()));
  }
}

// Sampling, scaling, splitting -------------------------------------------------

DesignMatrix sample_design(const ParameterSpace& space, std::size_t m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("sample_design needs m >= 1");
  Rng rng(seed);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(space.size()));
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const auto& dim = space[static_cast<std::size_t>(j)];
      values(i, j) = std::min(dim.upper, rng.uniform(dim.lower, dim.upper));
    }
  }
  return DesignMatrix(space, std::move(values));
}

Eigen::MatrixXd normalize_inputs(const Eigen::MatrixXd& raw, const ParameterSpace& space) {
  if (static_cast<std::size_t>(raw.cols()) != space.size()) {
    throw DataError(fmt::format("input has {} columns, expected {}", raw.cols(), space.size()));
  }
  Eigen::MatrixXd unit(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const auto& dim = space[static_cast<std::size_t>(j)];
    unit.col(j) = (raw.col(j).array() - dim.lower) / (dim.upper - dim.lower);
  }
  return unit;
}

Eigen::MatrixXd normalize_inputs(const DesignMatrix& design) { return normalize_inputs(design.values(), design.space()); }

Eigen::MatrixXd denormalize_inputs(const Eigen::MatrixXd& unit, const ParameterSpace& space) {
  Eigen::MatrixXd raw(unit.rows(), unit.cols());
  for (Eigen::Index j = 0; j < unit.cols(); ++j) {
    const auto& dim = space[static_cast<std::size_t>(j)];
    raw.col(j) = unit.col(j).array() * (dim.upper - dim.lower) + dim.lower;
  }
  return raw;
}

std::size_t validation_count(std::size_t m_train, double fraction) {
  // The small slack keeps e.g. 0.3 * 30 from flooring to 8.
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(m_train) + 1e-9));
}

EpochSplit epoch_split(std::size_t m_train, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("validation fraction must be in (0, 1)");
  const std::size_t n_val = validation_count(m_train, fraction);
  if (n_val < 1) {
    const auto minimum = static_cast<std::size_t>(std::ceil(1.0 / fraction - 1e-9));
    throw std::invalid_argument(fmt::format(
        "{} training samples leave no validation samples at fraction {}; need at least {}", m_train, fraction, minimum));
  }
  auto perm = rng.permutation(m_train);
  EpochSplit split;
  split.fit_indices.assign(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_val));
  split.val_indices.assign(perm.end() - static_cast<std::ptrdiff_t>(n_val), perm.end());
  return split;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& source, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = source.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

// .smx ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'M', 'X', '1'};

std::uint64_t read_u64(const std::vector<char>& bytes, std::size_t offset) {
  std::uint64_t v = 0;
  std::memcpy(&v, bytes.data() + offset, sizeof v);
  return v;
}

std::vector<char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void write_payload(std::ostream& out, const Eigen::MatrixXd& values) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor rm = values;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

struct SmxHeader {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint64_t n_loc = 0;
  std::uint64_t n_year = 0;
  std::size_t payload_offset = 0;
};

SmxHeader parse_header(const std::vector<char>& bytes, bool with_index, const std::filesystem::path& path) {
  const std::size_t header_size = 4 + 16 + (with_index ? 16 : 0);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "SMX", 3) != 0) {
    throw DataError(fmt::format("'{}' is not an .smx file (bad magic)", path.string()));
  }
  if (bytes[3] != kMagic[3]) {
    throw DataError(fmt::format("'{}' has unknown .smx version '{}'", path.string(), bytes[3]));
  }
  if (bytes.size() < header_size) {
    throw DataError(fmt::format("'{}' header truncated: expected {} bytes, got {}", path.string(), header_size,
                                bytes.size()));
  }
  SmxHeader h;
  h.rows = read_u64(bytes, 4);
  h.cols = read_u64(bytes, 12);
  if (with_index) {
    h.n_loc = read_u64(bytes, 20);
    h.n_year = read_u64(bytes, 28);
  }
  h.payload_offset = header_size;
  if (h.cols != 0 && h.rows > (UINT64_MAX / 8) / h.cols) {
    throw DataError(fmt::format("'{}' header dims {} x {} overflow", path.string(), h.rows, h.cols));
  }
  const std::uint64_t expected = header_size + h.rows * h.cols * sizeof(double);
  if (bytes.size() != expected) {
    throw DataError(fmt::format("'{}' payload size mismatch: header claims {} x {} so expected {} bytes, got {}",
                                path.string(), h.rows, h.cols, expected, bytes.size()));
  }
  return h;
}

Eigen::MatrixXd decode_payload(const std::vector<char>& bytes, const SmxHeader& h, const std::filesystem::path& path) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor rm(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  if (rm.size() > 0) std::memcpy(rm.data(), bytes.data() + h.payload_offset, static_cast<std::size_t>(rm.size()) * sizeof(double));
  for (Eigen::Index i = 0; i < rm.rows(); ++i) {
    for (Eigen::Index j = 0; j < rm.cols(); ++j) {
      if (!std::isfinite(rm(i, j))) {
        throw DataError(fmt::format("'{}' has a non-finite entry at row {}, col {}", path.string(), i, j));
      }
    }
  }
  return rm;
}

void open_for_write(std::ofstream& out, const std::filesystem::path& path) {
  out.open(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
}

}  // namespace

namespace detail {

void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

}  // namespace detail

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& values) {
  std::ofstream out;
  open_for_write(out, path);
  out.write(kMagic, 4);
  detail::write_u64(out, static_cast<std::uint64_t>(values.rows()));
  detail::write_u64(out, static_cast<std::uint64_t>(values.cols()));
  write_payload(out, values);
  if (!out) throw DataError(fmt::format("failed writing '{}'", path.string()));
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  const auto header = parse_header(bytes, false, path);
  return decode_payload(bytes, header, path);
}

void save_outputs(const std::filesystem::path& path, const OutputMatrix& outputs) {
  std::ofstream out;
  open_for_write(out, path);
  out.write(kMagic, 4);
  detail::write_u64(out, static_cast<std::uint64_t>(outputs.rows()));
  detail::write_u64(out, static_cast<std::uint64_t>(outputs.cols()));
  detail::write_u64(out, outputs.index_map().n_loc());
  detail::write_u64(out, outputs.index_map().n_year());
  write_payload(out, outputs.values());
  if (!out) throw DataError(fmt::format("failed writing '{}'", path.string()));
}

OutputMatrix load_outputs(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  const auto header = parse_header(bytes, true, path);
  if (header.n_loc == 0 || header.n_year == 0 || header.n_loc * header.n_year != header.cols) {
    throw DataError(fmt::format("'{}' index map {} x {} does not match {} columns", path.string(), header.n_loc,
                                header.n_year, header.cols));
  }
  return OutputMatrix(decode_payload(bytes, header, path), OutputIndexMap(header.n_loc, header.n_year));
}

// CSV ----------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

void save_design(const std::filesystem::path& path, const DesignMatrix& design) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  const auto names = design.space().names();
  out << fmt::format("{}\n", fmt::join(names, ","));
  const auto& v = design.values();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (j > 0) out << ',';
      out << fmt::format("{}", v(i, j));
    }
    out << '\n';
  }
  if (!out) throw DataError(fmt::format("failed writing '{}'", path.string()));
}

RawDesign read_design_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw DataError(fmt::format("'{}' is empty", path.string()));
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  RawDesign design;
  design.names = split_csv_line(line);
  const std::size_t d = design.names.size();
  std::vector<double> flat;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != d) {
      throw DataError(fmt::format("'{}' row {} has {} fields, header has {}", path.string(), row, fields.size(), d));
    }
    for (std::size_t j = 0; j < d; ++j) {
      double value = 0.0;
      const auto& f = fields[j];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw DataError(fmt::format("'{}' row {}, col {}: cannot parse '{}' as a real", path.string(), row, j, f));
      }
      if (!std::isfinite(value)) {
        throw DataError(fmt::format("'{}' has a non-finite entry at row {}, col {}", path.string(), row, j));
      }
      flat.push_back(value);
    }
    ++row;
  }
  design.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(d));
  return design;
}

DesignMatrix load_design(const std::filesystem::path& path, const ParameterSpace& space) {
  auto raw = read_design_csv(path);
  if (raw.names != space.names()) {
    throw DataError(fmt::format("'{}' header [{}] does not match parameter space [{}]", path.string(),
                                fmt::join(raw.names, ","), fmt::join(space.names(), ",")));
  }
  return DesignMatrix(space, std::move(raw.values));
}

// JSON helpers ---------------------------------------------------------------------

namespace detail {

nlohmann::json space_to_json(const ParameterSpace& space) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : space.dims()) dims.push_back({{"name", d.name}, {"lower", d.lower}, {"upper", d.upper}});
  return dims;
}

ParameterSpace space_from_json(const nlohmann::json& j) {
  std::vector<ParameterDim> dims;
  for (const auto& d : j) dims.push_back({d.at("name").get<std::string>(), d.at("lower").get<double>(), d.at("upper").get<double>()});
  return ParameterSpace(std::move(dims));
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(2) << '\n';
}

}  // namespace detail

void save_space(const std::filesystem::path& path, const ParameterSpace& space) {
  detail::write_json_file(path, {{"parameters", detail::space_to_json(space)}});
}

ParameterSpace load_space(const std::filesystem::path& path) {
  const auto j = detail::read_json_file(path);
  try {
    return detail::space_from_json(j.at("parameters"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("'{}' is not a parameter space: {}", path.string(), e.what()));
  } catch (const std::invalid_argument& e) {
    throw DataError(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

}  // namespace surrogate
