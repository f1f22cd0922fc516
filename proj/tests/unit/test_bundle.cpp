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


#include <doctest.h>

#include <fstream>
#include <json.hpp>

#include "surrogate/bundle.hpp"
#include "surrogate/error.hpp"
#include "surrogate/pipeline.hpp"
#include "surrogate/synth_esm.hpp"
#include "test_support.hpp"

using namespace surrogate;

namespace {

SynthDataset small_data(std::size_t m, std::uint64_t seed) {
  SynthConfig c;
  c.n_loc = 30;
  c.n_year = 4;
  const auto model = SynthModel::build(c);
  return generate_dataset(model, model.space(), m, seed);
}

SurrogateBundle small_bundle(SurrogateMode mode) {
  const auto data = small_data(20, 1);
  PipelineConfig cfg;
  cfg.mode = mode;
  cfg.fixed = default_hyperparams();
  cfg.train.max_epochs = 50;
  cfg.train.patience = 10;
  cfg.train.seed = 5;
  return build_surrogate(data.design, data.outputs, cfg).bundle;
}

}  // namespace

TEST_SUITE("bundle") {
  TEST_CASE("save and load reproduce predictions bitwise") {
    for (auto mode : {SurrogateMode::kReduced, SurrogateMode::kDirect}) {
      testing::TempDir dir("bundle");
      const auto bundle = small_bundle(mode);
      save_bundle(dir.path(), bundle);
      const auto back = load_bundle(dir.path());
      CHECK(back.mode == mode);
      CHECK(back.index_map == bundle.index_map);
      CHECK(back.hyperparams == bundle.hyperparams);
      CHECK(back.train_seed == bundle.train_seed);
      CHECK(back.model.weights == bundle.model.weights);
      CHECK(back.model.arch == bundle.model.arch);
      CHECK(back.basis.has_value() == (mode == SurrogateMode::kReduced));
      const auto x = sample_design(bundle.model.norm.input_space, 200, 9).values();
      CHECK(back.predict(x) == bundle.predict(x));
    }
  }

  TEST_CASE("corrupted arrays are detected") {
    testing::TempDir dir("corrupt");
    save_bundle(dir.path(), small_bundle(SurrogateMode::kReduced));
    const auto victim = dir / "right_vectors.smx";
    REQUIRE(std::filesystem::exists(victim));
    {
      std::fstream f(victim, std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(-3, std::ios::end);
      f.put('\x7f');
    }
    CHECK_THROWS_WITH_AS(load_bundle(dir.path()), doctest::Contains("corrupted"), DataError);
  }

  TEST_CASE("missing files and unknown versions are rejected") {
    testing::TempDir dir("version");
    save_bundle(dir.path(), small_bundle(SurrogateMode::kDirect));
    nlohmann::json manifest;
    {
      std::ifstream in(dir / "manifest.json");
      in >> manifest;
    }
    manifest["format_version"] = 99;
    {
      std::ofstream out(dir / "manifest.json");
      out << manifest.dump(2);
    }
    CHECK_THROWS_WITH_AS(load_bundle(dir.path()), doctest::Contains("format_version"), DataError);
    CHECK_THROWS_AS(load_bundle(dir / "nowhere"), DataError);
  }

  TEST_CASE("checksum of known bytes") {
    testing::TempDir dir("fnv");
    {
      std::ofstream out(dir / "a.bin", std::ios::binary);
      out << "a";
    }
    CHECK(fnv1a64(dir / "a.bin") == 0xaf63dc4c8601ec8cULL);
    {
      std::ofstream out(dir / "e.bin", std::ios::binary);
    }
    CHECK(fnv1a64(dir / "e.bin") == 0xcbf29ce484222325ULL);
  }
}
