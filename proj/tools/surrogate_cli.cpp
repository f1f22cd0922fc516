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


#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "surrogate/bundle.hpp"
#include "surrogate/dataset.hpp"
#include "surrogate/error.hpp"
#include "surrogate/experiments.hpp"
#include "surrogate/metrics.hpp"
#include "surrogate/parallel.hpp"
#include "surrogate/pipeline.hpp"
#include "surrogate/random.hpp"
#include "surrogate/svd_compress.hpp"
#include "surrogate/synth_esm.hpp"

namespace fs = std::filesystem;
using namespace surrogate;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool quiet = false;
};

Globals g;

template <typename... Args>
void info(fmt::format_string<Args...> format, Args&&... args) {
  if (!g.quiet) fmt::print(format, std::forward<Args>(args)...);
}

template <typename... Args>
void warn(fmt::format_string<Args...> format, Args&&... args) {
  fmt::print(stderr, "warning: {}\n", fmt::format(format, std::forward<Args>(args)...));
}

// gen ------------------------------------------------------------------------

struct GenArgs {
  fs::path out;
  std::size_t m_train = 20;
  std::size_t m_test = 1000;
  std::size_t n_loc = 1422;
  std::size_t n_year = 30;
  std::uint64_t model_seed = 0;
  bool restrict_viable = false;
};

void cmd_gen(const GenArgs& a) {
  SynthConfig config;
  config.n_loc = a.n_loc;
  config.n_year = a.n_year;
  config.seed = a.model_seed;
  const auto model = SynthModel::build(config);
  const auto domain = a.restrict_viable ? model.viable_space() : model.space();

  fs::create_directories(a.out);
  const auto train = generate_dataset(model, domain, a.m_train, derive_seed(g.seed, 1));
  const auto test = generate_dataset(model, domain, a.m_test, derive_seed(g.seed, 2));
  save_design(a.out / "train_design.csv", train.design);
  save_outputs(a.out / "train_outputs.smx", train.outputs);
  save_design(a.out / "test_design.csv", test.design);
  save_outputs(a.out / "test_outputs.smx", test.outputs);
  save_space(a.out / "space.json", domain);
  save_synth_config(a.out / "synth_config.json", config);
  info("train {} x {}, test {} x {} ({} locations x {} years, {} cold){}\n", train.outputs.rows(),
       train.outputs.cols(), test.outputs.rows(), test.outputs.cols(), config.n_loc, config.n_year,
       model.cold_count(), a.restrict_viable ? ", viable subdomain" : "");
}

// svd-report -----------------------------------------------------------------

struct SvdReportArgs {
  fs::path outputs;
  Eigen::Index k_max = 20;
  bool energy = false;
};

void cmd_svd_report(const SvdReportArgs& a) {
  const auto outputs = load_outputs(a.outputs);
  const Eigen::Index full = std::min(outputs.rows(), outputs.cols());
  Eigen::Index k_max = a.k_max;
  if (k_max > full) {
    warn("k-max {} exceeds min(m, n) = {}, clamped", k_max, full);
    k_max = full;
  }
  const auto svd = truncated_svd(outputs.values(), 1);
  const auto mode = a.energy ? InfoMode::kEnergy : InfoMode::kPlainSum;
  info("{:>4} {:>16} {:>10}\n", "k", "sigma", "fraction");
  for (Eigen::Index k = 1; k <= k_max; ++k) {
    info("{:>4} {:>16.8g} {:>10.6f}\n", k, svd.basis.singular_values[static_cast<std::size_t>(k - 1)],
         info_fraction(svd.basis, k, mode));
  }
}

// train ----------------------------------------------------------------------

struct TrainArgs {
  fs::path design;
  fs::path outputs;
  fs::path space;
  fs::path out;
  std::optional<Eigen::Index> k;
  std::optional<double> target_fraction;
  bool energy = false;
  std::vector<std::size_t> hidden{10, 10};
  double lr = 0.01;
  bool tune = false;
  std::size_t trials = 100;
  std::size_t startup = 20;
  bool case2 = false;
  bool fixed_val = false;
  int max_epochs = 800;
  int patience = 100;
  double val_fraction = 0.3;
};

Hyperparams hyperparams_from(const std::vector<std::size_t>& hidden, double lr) {
  if (hidden.size() < 2 || hidden.size() > 3) {
    throw std::invalid_argument(fmt::format("--hidden needs 2 or 3 widths, got {}", hidden.size()));
  }
  return {static_cast<int>(hidden.size()), hidden[0], hidden[1], hidden.size() == 3 ? hidden[2] : 0, lr};
}

void cmd_train(const TrainArgs& a) {
  const fs::path space_path = a.space.empty() ? a.design.parent_path() / "space.json" : a.space;
  const auto space = load_space(space_path);
  const auto design = load_design(a.design, space);
  const auto outputs = load_outputs(a.outputs);
  if (design.rows() != outputs.rows()) {
    throw DataError(fmt::format("design has {} rows but outputs have {}", design.rows(), outputs.rows()));
  }

  PipelineConfig config;
  config.mode = a.case2 ? SurrogateMode::kDirect : SurrogateMode::kReduced;
  config.rank = a.k;
  config.target_fraction = a.target_fraction;
  config.info_mode = a.energy ? InfoMode::kEnergy : InfoMode::kPlainSum;
  config.train.max_epochs = a.max_epochs;
  config.train.patience = std::min(a.patience, a.max_epochs);
  config.train.val_fraction = a.val_fraction;
  config.train.fixed_validation = a.fixed_val;
  config.train.seed = derive_seed(g.seed, 3);
  if (a.tune) {
    config.tpe.n_trials = a.trials;
    config.tpe.n_startup = std::min(a.startup, a.trials);
    config.tpe.seed = derive_seed(g.seed, 4);
  } else {
    config.fixed = hyperparams_from(a.hidden, a.lr);
  }
  config.validate();

  const auto built = build_surrogate(design, outputs, config);
  const auto& bundle = built.bundle;
  save_bundle(a.out, bundle);
  save_loss_curve_csv(a.out / "loss_curve.csv", built.report);
  if (a.tune) save_history_csv(a.out / "history.csv", built.history);

  if (bundle.basis) {
    info("K {} (info fraction {:.4f})\n", bundle.basis->k(), info_fraction(*bundle.basis, bundle.basis->k(), config.info_mode));
  } else {
    info("direct mode, {} outputs\n", outputs.cols());
  }
  info("hidden {} lr {:.6g}, {} parameters\n", fmt::join(bundle.model.arch.hidden_widths, "x"), bundle.hyperparams.lr,
       bundle.model.arch.parameter_count());
  info("best epoch {} of {}, val loss {:.6g}, {:.2f} s\n", built.report.best_epoch, built.report.stopped_epoch,
       built.report.best_val_loss, built.seconds);
  if (a.tune) info("{} trials, history in {}\n", built.history.size(), (a.out / "history.csv").string());
  info("bundle written to {}\n", a.out.string());
}

// predict --------------------------------------------------------------------

struct PredictArgs {
  fs::path bundle;
  fs::path design;
  fs::path out;
};

void cmd_predict(const PredictArgs& a) {
  const auto bundle = load_bundle(a.bundle);
  const auto raw = read_design_csv(a.design);
  const auto expected = bundle.model.norm.input_space.names();
  if (raw.names != expected) {
    throw DataError(fmt::format("design columns [{}] do not match the bundle's parameters [{}]",
                                fmt::join(raw.names, ","), fmt::join(expected, ",")));
  }
  std::size_t outside = 0;
  const auto pred = bundle.predict(raw.values, &outside);
  if (outside > 0) warn("{} of {} rows lie outside the training space (extrapolation)", outside, raw.values.rows());
  save_outputs(a.out, OutputMatrix(pred, bundle.index_map));
  info("predictions {} x {} written to {}\n", pred.rows(), pred.cols(), a.out.string());
}

// evaluate -------------------------------------------------------------------

struct EvaluateArgs {
  fs::path pred;
  fs::path truth;
  fs::path out;
};

void cmd_evaluate(const EvaluateArgs& a) {
  const auto truth = load_outputs(a.truth);
  const auto pred = load_outputs(a.pred);
  if (!(pred.index_map() == truth.index_map())) {
    throw DataError(fmt::format("prediction layout {} x {} differs from truth layout {} x {}", pred.index_map().n_loc(),
                                pred.index_map().n_year(), truth.index_map().n_loc(), truth.index_map().n_year()));
  }
  const auto report = evaluate(truth, pred.values());
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    save_report(a.out, report, truth.index_map());
  }
  info("{}", format_summary(report));
}

// experiment -----------------------------------------------------------------

struct ExperimentArgs {
  std::string name;
  fs::path out;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t m_test = 1000;
  std::size_t n_loc = 1422;
  std::size_t n_year = 30;
  bool tune = false;
  std::size_t trials = 100;
  bool fixed_val = false;
  bool pin_hidden = false;
};

void cmd_experiment(const ExperimentArgs& a) {
  ExperimentOptions options;
  options.synth.n_loc = a.n_loc;
  options.synth.n_year = a.n_year;
  options.synth.seed = g.seed;
  options.seeds = a.seeds;
  options.m_test = a.m_test;
  options.tune = a.tune;
  options.tpe.n_trials = a.trials;
  options.tpe.n_startup = std::min(options.tpe.n_startup, a.trials);
  options.train.fixed_validation = a.fixed_val;
  if (a.pin_hidden) {
    options.search.depths = {2};
    options.search.widths = {options.hyperparams.n1};
  }
  const auto table = run_experiment(a.name, options);
  info("{}", table.to_text());
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw DataError(fmt::format("cannot write '{}'", a.out.string()));
    out << table.to_csv();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-order neural surrogates for many-output simulators"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware concurrency)");
  app.add_flag("--quiet", g.quiet, "Only print errors and warnings");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate synthetic train/test datasets");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--m-train", gen.m_train)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--m-test", gen.m_test)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--n-loc", gen.n_loc)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--n-year", gen.n_year)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--model-seed", gen.model_seed, "Seed of the synthetic model itself");
  gen_cmd->add_flag("--restrict-viable", gen.restrict_viable, "Sample only where no outputs are forced to zero");

  SvdReportArgs svd;
  auto* svd_cmd = app.add_subcommand("svd-report", "Print the singular spectrum and information fractions");
  svd_cmd->add_option("--outputs", svd.outputs, "Training outputs (.smx)")->required()->check(CLI::ExistingFile);
  svd_cmd->add_option("--k-max", svd.k_max)->check(CLI::PositiveNumber);
  svd_cmd->add_flag("--energy", svd.energy, "Use squared singular values");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Fit a surrogate and write a bundle");
  train_cmd->add_option("--design", tr.design, "Training design CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--outputs", tr.outputs, "Training outputs (.smx)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--space", tr.space, "Parameter space JSON (default: space.json next to the design)");
  train_cmd->add_option("--out", tr.out, "Bundle directory")->required();
  auto* k_opt = train_cmd->add_option("--k", tr.k, "Number of retained singular directions")->check(CLI::PositiveNumber);
  auto* frac_opt = train_cmd->add_option("--target-fraction", tr.target_fraction, "Smallest K reaching this fraction")
                       ->check(CLI::Range(0.0, 1.0));
  k_opt->excludes(frac_opt);
  train_cmd->add_flag("--energy", tr.energy, "Information fraction from squared singular values");
  auto* hidden_opt = train_cmd->add_option("--hidden", tr.hidden, "Hidden widths, e.g. 10,10")->delimiter(',');
  auto* lr_opt = train_cmd->add_option("--lr", tr.lr, "Learning rate")->check(CLI::PositiveNumber);
  auto* tune_flag = train_cmd->add_flag("--tune", tr.tune, "Tune architecture and learning rate with TPE");
  tune_flag->excludes(hidden_opt)->excludes(lr_opt);
  train_cmd->add_option("--trials", tr.trials, "TPE trials")->check(CLI::PositiveNumber);
  train_cmd->add_option("--startup", tr.startup, "Random trials before TPE")->check(CLI::PositiveNumber);
  auto* case2_flag = train_cmd->add_flag("--case2", tr.case2, "Train on all outputs directly (no SVD)");
  case2_flag->excludes(k_opt)->excludes(frac_opt);
  train_cmd->add_flag("--fixed-val", tr.fixed_val, "Keep one validation split for all epochs");
  train_cmd->add_option("--max-epochs", tr.max_epochs, "Epoch limit")->check(CLI::PositiveNumber);
  train_cmd->add_option("--patience", tr.patience, "Epochs without improvement before stopping (capped at --max-epochs)")->check(CLI::PositiveNumber);
  train_cmd->add_option("--val-fraction", tr.val_fraction, "Validation share of the training rows")->check(CLI::Range(0.0, 1.0));

  PredictArgs pr;
  auto* predict_cmd = app.add_subcommand("predict", "Evaluate a bundle at new parameter rows");
  predict_cmd->add_option("--bundle", pr.bundle)->required()->check(CLI::ExistingDirectory);
  predict_cmd->add_option("--design", pr.design, "Design CSV")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", pr.out, "Predictions (.smx)")->required();

  EvaluateArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against simulator outputs");
  eval_cmd->add_option("--pred", ev.pred, "Predictions (.smx)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--truth", ev.truth, "Truth outputs (.smx)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", ev.out, "Report directory");

  ExperimentArgs ex;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a scripted comparison on the synthetic benchmark");
  exp_cmd->add_option("name", ex.name)
      ->required()
      ->check(CLI::IsMember({"case-compare", "ntrain-sweep", "subdomain", "svd-sweep"}));
  exp_cmd->add_option("--out", ex.out, "Table CSV");
  exp_cmd->add_option("--seeds", ex.seeds)->delimiter(',');
  exp_cmd->add_option("--m-test", ex.m_test)->check(CLI::PositiveNumber);
  exp_cmd->add_option("--n-loc", ex.n_loc)->check(CLI::PositiveNumber);
  exp_cmd->add_option("--n-year", ex.n_year)->check(CLI::PositiveNumber);
  exp_cmd->add_flag("--tune", ex.tune, "Tune Case I with TPE");
  exp_cmd->add_option("--trials", ex.trials)->check(CLI::PositiveNumber);
  exp_cmd->add_flag("--fixed-val", ex.fixed_val, "Keep one validation split for all epochs");
  exp_cmd->add_flag("--pin-hidden", ex.pin_hidden, "Tune only the learning rate, hidden widths stay 10,10");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (g.threads > 0) set_thread_count(g.threads);
    if (gen_cmd->parsed()) cmd_gen(gen);
    if (svd_cmd->parsed()) cmd_svd_report(svd);
    if (train_cmd->parsed()) cmd_train(tr);
    if (predict_cmd->parsed()) cmd_predict(pr);
    if (eval_cmd->parsed()) cmd_evaluate(ev);
    if (exp_cmd->parsed()) cmd_experiment(ex);
  } catch (const DivergenceError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitDivergence;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitData;
  }
  return 0;
}
