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


#include "surrogate/bundle.hpp"

#include <fmt/format.h>

#include <chrono>
#include <ctime>
#include <fstream>

#include "json_util.hpp"
#include "surrogate/error.hpp"

namespace surrogate {

Eigen::MatrixXd SurrogateBundle::predict(const Eigen::MatrixXd& raw_inputs, std::size_t* out_of_range_rows) const {
  Eigen::MatrixXd out = surrogate::predict(model, raw_inputs, out_of_range_rows);
  if (mode == SurrogateMode::kReduced) return reconstruct(out, *basis);
  return out;
}

std::uint64_t fnv1a64(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof buffer);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

namespace {

using nlohmann::json;

std::string now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Eigen::MatrixXd row_of(const Eigen::VectorXd& v) { return v.transpose(); }

Eigen::MatrixXd row_of(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

class ArrayWriter {
 public:
  explicit ArrayWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, const Eigen::MatrixXd& values) {
    const std::string file = name + ".smx";
    save_matrix(dir_ / file, values);
    entries_[name] = {{"file", file}, {"rows", values.rows()}, {"cols", values.cols()},
                      {"fnv1a64", fmt::format("{:016x}", fnv1a64(dir_ / file))}};
  }

  json entries() const { return entries_; }

 private:
  std::filesystem::path dir_;
  json entries_ = json::object();
};

class ArrayReader {
 public:
  ArrayReader(std::filesystem::path dir, json entries) : dir_(std::move(dir)), entries_(std::move(entries)) {}

  Eigen::MatrixXd get(const std::string& name, Eigen::Index rows, Eigen::Index cols) const {
    if (!entries_.contains(name)) throw DataError(fmt::format("bundle manifest lists no array '{}'", name));
    const auto& e = entries_.at(name);
    const auto path = dir_ / e.at("file").get<std::string>();
    const auto expected = e.at("fnv1a64").get<std::string>();
    const auto actual = fmt::format("{:016x}", fnv1a64(path));
    if (actual != expected) {
      throw DataError(fmt::format("bundle array '{}' is corrupted: checksum {} != manifest {}", path.string(), actual,
                                  expected));
    }
    Eigen::MatrixXd m = load_matrix(path);
    if (m.rows() != rows || m.cols() != cols) {
      throw DataError(fmt::format("bundle array '{}' is {}x{}, expected {}x{}", name, m.rows(), m.cols(), rows, cols));
    }
    return m;
  }

 private:
  std::filesystem::path dir_;
  json entries_;
};

}  // namespace

void save_bundle(const std::filesystem::path& dir, const SurrogateBundle& b) {
  std::filesystem::create_directories(dir);
  ArrayWriter arrays(dir);
  if (b.mode == SurrogateMode::kReduced) {
    arrays.add("singular_values", row_of(b.basis->singular_values));
    arrays.add("right_vectors", b.basis->right_vectors);
  }
  for (std::size_t l = 0; l < b.model.weights.layers.size(); ++l) {
    arrays.add(fmt::format("layer{}_weight", l), b.model.weights.layers[l].weight);
    arrays.add(fmt::format("layer{}_bias", l), row_of(b.model.weights.layers[l].bias));
  }
  arrays.add("target_mean", row_of(b.model.norm.target_mean));
  arrays.add("target_std", row_of(b.model.norm.target_std));

  json manifest = {
      {"format_version", SurrogateBundle::kFormatVersion},
      {"created", b.created.empty() ? now_iso8601() : b.created},
      {"mode", b.mode == SurrogateMode::kReduced ? "reduced" : "direct"},
      {"parameter_space", detail::space_to_json(b.model.norm.input_space)},
      {"index_map", {{"n_loc", b.index_map.n_loc()}, {"n_year", b.index_map.n_year()}}},
      {"architecture",
       {{"input_dim", b.model.arch.input_dim}, {"hidden", b.model.arch.hidden_widths}, {"output_dim", b.model.arch.output_dim}}},
      {"hyperparams",
       {{"L", b.hyperparams.depth}, {"N1", b.hyperparams.n1}, {"N2", b.hyperparams.n2}, {"N3", b.hyperparams.n3},
        {"lr", b.hyperparams.lr}}},
      {"seeds", {{"train", b.train_seed}}},
      {"arrays", arrays.entries()},
  };
  if (b.tuning_seed) manifest["seeds"]["tuning"] = *b.tuning_seed;
  if (b.mode == SurrogateMode::kReduced) {
    manifest["k"] = b.basis->k();
    manifest["svd_degenerate"] = b.basis->degenerate;
  }
  detail::write_json_file(dir / "manifest.json", manifest);
}

SurrogateBundle load_bundle(const std::filesystem::path& dir) {
  const auto manifest = detail::read_json_file(dir / "manifest.json");
  try {
    const int version = manifest.at("format_version").get<int>();
    if (version != SurrogateBundle::kFormatVersion) {
      throw DataError(fmt::format("bundle format_version {} is not supported (expected {})", version,
                                  SurrogateBundle::kFormatVersion));
    }
    const auto mode_name = manifest.at("mode").get<std::string>();
    if (mode_name != "reduced" && mode_name != "direct") throw DataError(fmt::format("unknown bundle mode '{}'", mode_name));
    const auto mode = mode_name == "reduced" ? SurrogateMode::kReduced : SurrogateMode::kDirect;
    const OutputIndexMap index_map(manifest.at("index_map").at("n_loc").get<std::size_t>(),
                                   manifest.at("index_map").at("n_year").get<std::size_t>());
    const auto& arch_json = manifest.at("architecture");
    MlpArchitecture arch{arch_json.at("input_dim").get<std::size_t>(),
                         arch_json.at("hidden").get<std::vector<std::size_t>>(),
                         arch_json.at("output_dim").get<std::size_t>()};
    arch.validate();
    const auto& hp = manifest.at("hyperparams");
    const Hyperparams hyperparams{hp.at("L").get<int>(), hp.at("N1").get<std::size_t>(), hp.at("N2").get<std::size_t>(),
                                  hp.at("N3").get<std::size_t>(), hp.at("lr").get<double>()};
    std::optional<std::uint64_t> tuning_seed;
    if (manifest.at("seeds").contains("tuning")) tuning_seed = manifest.at("seeds").at("tuning").get<std::uint64_t>();

    const ArrayReader arrays(dir, manifest.at("arrays"));
    const auto n = static_cast<Eigen::Index>(index_map.size());
    const auto out_dim = static_cast<Eigen::Index>(arch.output_dim);
    std::optional<SvdBasis> basis;
    if (mode == SurrogateMode::kReduced) {
      const auto k = manifest.at("k").get<Eigen::Index>();
      if (k != out_dim) throw DataError(fmt::format("bundle k={} but network output dim {}", k, out_dim));
      const auto& sv_entry = manifest.at("arrays").at("singular_values");
      const Eigen::MatrixXd sv = arrays.get("singular_values", 1, sv_entry.at("cols").get<Eigen::Index>());
      basis = SvdBasis{std::vector<double>(sv.data(), sv.data() + sv.size()), arrays.get("right_vectors", n, k),
                       manifest.value("svd_degenerate", false)};
    } else if (out_dim != n) {
      throw DataError(fmt::format("direct bundle output dim {} does not match n = {}", out_dim, n));
    }

    MlpWeights weights;
    const auto sizes = arch.layer_sizes();
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const auto fan_in = static_cast<Eigen::Index>(sizes[l]);
      const auto fan_out = static_cast<Eigen::Index>(sizes[l + 1]);
      weights.layers.push_back({arrays.get(fmt::format("layer{}_weight", l), fan_in, fan_out),
                                arrays.get(fmt::format("layer{}_bias", l), 1, fan_out).transpose()});
    }
    ParameterSpace space = detail::space_from_json(manifest.at("parameter_space"));
    if (space.size() != arch.input_dim) throw DataError("bundle parameter space does not match the network input dim");
    NormStats norm{std::move(space), arrays.get("target_mean", 1, out_dim).transpose(),
                   arrays.get("target_std", 1, out_dim).transpose()};

    return SurrogateBundle{
        .mode = mode,
        .index_map = index_map,
        .basis = std::move(basis),
        .model = MlpModel{std::move(arch), std::move(weights), std::move(norm)},
        .hyperparams = hyperparams,
        .train_seed = manifest.at("seeds").at("train").get<std::uint64_t>(),
        .tuning_seed = tuning_seed,
        .created = manifest.at("created").get<std::string>(),
    };
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("bundle manifest '{}' is malformed: {}", (dir / "manifest.json").string(), e.what()));
  } catch (const std::invalid_argument& e) {
    throw DataError(fmt::format("bundle '{}' is inconsistent: {}", dir.string(), e.what()));
  }
}

}  // namespace surrogate
