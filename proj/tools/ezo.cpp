// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// ezo: train, evaluate and fine-tune hybrid zeroth-order / backprop models,
// benchmark the integer sign estimator and print memory models.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ezo/config.h"
#include "ezo/harness.h"
#include "ezo/memmodel.h"
#include "ezo/prng.h"

namespace {

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> sets;
  std::string data_dir;
  std::string out_dir;
  std::optional<uint32_t> seed;

  void attach(CLI::App* app, bool with_data = true) {
    app->add_option("--config", config_file, "key=value config file");
    app->add_option("--set", sets, "override one setting (key=value)")
        ->take_all();
    if (with_data) {
      app->add_option("--data-dir", data_dir,
                      "directory with the MNIST IDX files");
    }
    app->add_option("--out-dir", out_dir, "output directory");
    app->add_option("--seed", seed, "master seed");
  }

  ezo::RunConfig build() const {
    ezo::RunConfig cfg;
    if (!config_file.empty()) ezo::apply_config_file(cfg, config_file);
    for (const auto& s : sets) ezo::apply_assignment(cfg, s);
    if (!data_dir.empty()) cfg.data_dir = data_dir;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }
};

void write_text(const std::string& dir, const std::string& name,
                const std::string& text) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid zeroth-order / backprop training on MNIST"};
  app.require_subcommand(1);

  CommonOptions train_opts, eval_opts, ft_opts, sign_opts, mem_opts;

  CLI::App* train = app.add_subcommand("train", "train LeNet-5 from scratch");
  train_opts.attach(train);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_opts.attach(eval);
  std::string eval_ckpt;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();

  CLI::App* ft = app.add_subcommand(
      "finetune", "fine-tune a checkpoint on rotated MNIST subsets");
  ft_opts.attach(ft);
  std::string ft_ckpt;
  ft->add_option("--checkpoint", ft_ckpt, "base checkpoint");

  CLI::App* sign = app.add_subcommand(
      "signtest", "integer vs float sign of the loss difference");
  sign_opts.attach(sign, false);
  size_t trials = 10000, sign_batch = 256, classes = 10;
  bool identical = false;
  sign->add_option("--trials", trials, "random logit pairs")
      ->check(CLI::PositiveNumber);
  sign->add_option("--batch", sign_batch, "samples per pair")
      ->check(CLI::PositiveNumber);
  sign->add_option("--classes", classes, "classes per sample")
      ->check(CLI::Range(2, 1000));
  sign->add_flag("--identical", identical, "use identical pairs");

  CLI::App* mem = app.add_subcommand("memreport", "training memory model");
  mem_opts.attach(mem, false);
  std::string spec_file;
  size_t mem_batch = 32;
  mem->add_option("--spec", spec_file, "shape spec file (default LeNet-5)");
  mem->add_option("--batch", mem_batch, "batch size")
      ->check(CLI::PositiveNumber);

  CLI::App* vectors = app.add_subcommand(
      "prngvectors", "print the PRNG cross-implementation test vectors");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const ezo::RunConfig cfg = train_opts.build();
      const ezo::RunData data = ezo::load_run_data(cfg);
      ezo::run_train(cfg, data, cfg.out_dir, &std::cout);
      std::cout << "wrote " << cfg.out_dir << "/metrics.csv and final.ckpt\n";
    } else if (*eval) {
      const ezo::RunConfig cfg = eval_opts.build();
      const ezo::RunData data = ezo::load_run_data(cfg);
      const ezo::EvalResult r =
          ezo::run_eval(eval_ckpt, data.test, cfg.eval_batch);
      std::cout << "loss " << r.loss << "  accuracy " << r.accuracy << "\n";
    } else if (*ft) {
      ezo::RunConfig cfg = ft_opts.build();
      if (!ft_ckpt.empty()) cfg.checkpoint = ft_ckpt;
      const ezo::RunData data = ezo::load_run_data(cfg);
      ezo::run_finetune(cfg, data, cfg.out_dir, &std::cout);
      std::cout << "wrote " << cfg.out_dir << "/metrics.csv\n";
    } else if (*sign) {
      const ezo::RunConfig cfg = sign_opts.build();
      const ezo::SignTestResult r =
          ezo::run_signtest(trials, sign_batch, classes, cfg.seed, identical);
      const std::string csv = ezo::signtest_csv(sign_batch, classes, r);
      std::cout << csv;
      if (!sign_opts.out_dir.empty()) {
        write_text(cfg.out_dir, "signtest.csv", csv);
      }
    } else if (*vectors) {
      std::cout << ezo::prng_test_vectors();
    } else if (*mem) {
      const ezo::RunConfig cfg = mem_opts.build();
      const ezo::ShapeSpec spec =
          spec_file.empty()
              ? ezo::make_shape_spec(ezo::lenet5_input_shape(),
                                     ezo::lenet5_layers(), true)
              : ezo::load_shape_spec(spec_file);
      const auto reports = ezo::run_memreport(spec, mem_batch);
      std::cout << ezo::memory_table(reports);
      if (!mem_opts.out_dir.empty()) {
        write_text(cfg.out_dir, "memreport.csv", ezo::memory_csv(reports));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
