// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/harness.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ezo/checkpoint.h"
#include "ezo/prng.h"
#include "ezo/zo_int8.h"

namespace ezo {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double seconds(int64_t ns) { return static_cast<double>(ns) * 1e-9; }

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
  if (!f) throw std::runtime_error("error writing " + p.string());
}

// Collects rows as epochs finish and appends them to the output files right
// away, so an interrupted run still leaves its completed epochs on disk.
class RunRecorder {
 public:
  RunRecorder(const std::string& out_dir, const RunConfig& cfg,
              std::ostream* log)
      : log_(log) {
    csv_ = metrics_csv_header();
    if (out_dir.empty()) return;
    dir_ = out_dir;
    std::filesystem::create_directories(dir_);
    write_file(dir_ / "config.txt", dump_config(cfg));
    write_file(dir_ / "metrics.csv", csv_);
    write_file(dir_ / "timing.csv", timing_csv_header());
  }

  void add(const EpochMetrics& m) {
    const std::string row = metrics_csv_row(m);
    csv_ += row;
    epochs_.push_back(m);
    if (!dir_.empty()) {
      std::ofstream(dir_ / "metrics.csv", std::ios::app | std::ios::binary)
          << row;
      std::ofstream(dir_ / "timing.csv", std::ios::app | std::ios::binary)
          << timing_csv_row(m);
    }
    if (log_ != nullptr) {
      *log_ << "epoch " << m.epoch << "  lr " << fmt(m.lr) << "  train_loss "
            << fmt(m.train_loss) << "  test_loss " << fmt(m.test_loss)
            << "  test_acc " << fmt(m.test_accuracy) << std::endl;
    }
  }

  template <typename Net>
  void save(const Net& net) const {
    if (!dir_.empty()) save_checkpoint((dir_ / "final.ckpt").string(), net);
  }

  RunResult result() && { return {std::move(epochs_), std::move(csv_)}; }

 private:
  std::filesystem::path dir_;
  std::ostream* log_;
  std::string csv_;
  std::vector<EpochMetrics> epochs_;
};

}  // namespace

std::string metrics_csv_header() {
  return "# ezo metrics v1\n"
         "epoch,lr,b_bp,p_zero,train_loss,test_loss,test_accuracy,steps,"
         "skipped_steps,zero_sign_steps,train_float_ops\n";
}

std::string metrics_csv_row(const EpochMetrics& m) {
  std::ostringstream os;
  os << m.epoch << ',' << fmt(m.lr) << ',' << m.b_bp << ',' << fmt(m.p_zero)
     << ',' << fmt(m.train_loss) << ',' << fmt(m.test_loss) << ','
     << fmt(m.test_accuracy) << ',' << m.steps << ',' << m.skipped_steps << ','
     << m.zero_sign_steps << ',' << m.train_float_ops << '\n';
  return os.str();
}

std::string timing_csv_header() {
  return "# ezo timing v1 (seconds per epoch)\n"
         "epoch,forward,zo_perturb,zo_update,bp_backward,loss\n";
}

std::string timing_csv_row(const EpochMetrics& m) {
  std::ostringstream os;
  os << m.epoch << ',' << fmt(seconds(m.times.forward)) << ','
     << fmt(seconds(m.times.zo_perturb)) << ','
     << fmt(seconds(m.times.zo_update)) << ','
     << fmt(seconds(m.times.bp_backward)) << ','
     << fmt(seconds(m.times.loss)) << '\n';
  return os.str();
}

RunData load_run_data(const RunConfig& cfg) {
  RunData d{load_mnist_split(cfg.data_dir, true),
            load_mnist_split(cfg.data_dir, false)};
  if (cfg.train_subset != 0) d.train = head(d.train, cfg.train_subset);
  if (cfg.test_subset != 0) d.test = head(d.test, cfg.test_subset);
  return d;
}

RunResult run_train(const RunConfig& cfg, const RunData& data,
                    const std::string& out_dir, std::ostream* log) {
  cfg.validate();
  RunRecorder rec(out_dir, cfg, log);
  const SeedPlan seeds = SeedPlan::from_master(cfg.seed);
  SeededGenerator init(seeds.init);
  auto cb = [&](const EpochMetrics& m) { rec.add(m); };
  if (cfg.precision == Precision::kFp32) {
    Network net = make_lenet5();
    init_parameters(net, init);
    train_fp32(net, data.train, data.test, cfg, cb);
    rec.save(net);
  } else {
    QuantNetwork net = make_lenet5_int8(cfg.param_exponent);
    init_quant_parameters(net, init, cfg.r_init);
    train_int8(net, quantize_dataset(data.train), quantize_dataset(data.test),
               cfg, cb);
    rec.save(net);
  }
  return std::move(rec).result();
}

EvalResult run_eval(const std::string& checkpoint, const Dataset& test,
                    size_t eval_batch) {
  Checkpoint ck = load_checkpoint(checkpoint);
  if (ck.precision == Precision::kFp32) {
    if (ck.fp32->input_shape() != Shape(test.images.shape().begin() + 1,
                                        test.images.shape().end())) {
      throw std::invalid_argument("checkpoint input shape does not match data");
    }
    return evaluate(*ck.fp32, test, eval_batch);
  }
  return evaluate(*ck.int8, quantize_dataset(test), eval_batch);
}

RunResult run_finetune(const RunConfig& cfg_in, const RunData& data,
                       const std::string& out_dir, std::ostream* log) {
  if (cfg_in.checkpoint.empty()) {
    throw std::invalid_argument("finetune needs checkpoint=<path>");
  }
  Checkpoint ck = load_checkpoint(cfg_in.checkpoint);
  RunConfig cfg = cfg_in;
  cfg.precision = ck.precision;
  cfg.validate();

  SeededGenerator subset_seeds(SeedPlan::from_master(cfg.seed).data);
  const uint32_t train_seed = subset_seeds.next_u32();
  const uint32_t test_seed = subset_seeds.next_u32();
  const Dataset train =
      make_rotated_subset(data.train, cfg.finetune_train, cfg.angle, train_seed);
  const Dataset test =
      make_rotated_subset(data.test, cfg.finetune_test, cfg.angle, test_seed);

  RunRecorder rec(out_dir, cfg, log);
  auto cb = [&](const EpochMetrics& m) { rec.add(m); };
  EpochMetrics baseline;
  baseline.epoch = -1;
  baseline.train_loss = std::nan("");
  if (ck.precision == Precision::kFp32) {
    Network& net = *ck.fp32;
    const EvalResult r = evaluate(net, test, cfg.eval_batch);
    baseline.test_loss = r.loss;
    baseline.test_accuracy = r.accuracy;
    rec.add(baseline);
    train_fp32(net, train, test, cfg, cb);
    rec.save(net);
  } else {
    QuantNetwork& net = *ck.int8;
    const QuantDataset qtrain = quantize_dataset(train);
    const QuantDataset qtest = quantize_dataset(test);
    const EvalResult r = evaluate(net, qtest, cfg.eval_batch);
    baseline.test_loss = r.loss;
    baseline.test_accuracy = r.accuracy;
    rec.add(baseline);
    train_int8(net, qtrain, qtest, cfg, cb);
    rec.save(net);
  }
  return std::move(rec).result();
}

SignTestResult run_signtest(size_t trials, size_t batch, size_t classes,
                            uint32_t seed, bool identical) {
  if (trials == 0 || batch == 0 || classes < 2) {
    throw std::invalid_argument("signtest needs trials, B >= 1 and K >= 2");
  }
  SeededGenerator gen(seed);
  SignTestResult r;
  r.trials = trials;
  std::vector<int> labels(batch);
  for (size_t t = 0; t < trials; ++t) {
    const int base = -7 + static_cast<int>(gen.next_u32() % 5);
    const int offset = static_cast<int>(gen.next_u32() % 9) - 4;
    QuantTensor a({batch, classes}, base);
    fill_uniform_int8(gen, a.data, 127);
    QuantTensor b = a;
    if (!identical) {
      b.exponent = base + offset;
      fill_uniform_int8(gen, b.data, 127);
    }
    for (auto& y : labels) y = static_cast<int>(gen.next_u32() % classes);
    const int ref = float_reference_sign(a, b, labels);
    if (ref == 0) {
      ++r.excluded;
      continue;
    }
    if (sign_loss_diff(a, b, labels) == ref) ++r.agreements;
  }
  const size_t denom = r.trials - r.excluded;
  r.zero_denominator = denom == 0;
  r.rate = denom == 0 ? 1.0
                      : static_cast<double>(r.agreements) /
                            static_cast<double>(denom);
  return r;
}

std::string signtest_csv(size_t batch, size_t classes,
                         const SignTestResult& r) {
  std::ostringstream os;
  os << "# ezo signtest v1\n"
     << "batch,classes,trials,excluded,agreements,rate,zero_denominator\n"
     << batch << ',' << classes << ',' << r.trials << ',' << r.excluded << ','
     << r.agreements << ',' << fmt(r.rate) << ','
     << (r.zero_denominator ? 1 : 0) << '\n';
  return os.str();
}

std::vector<MemoryReport> run_memreport(const ShapeSpec& spec_with_bias,
                                        size_t batch) {
  std::vector<MemoryReport> out =
      partition_sweep(spec_with_bias, batch, Precision::kFp32);
  for (auto& r : partition_sweep(spec_with_bias, batch, Precision::kFp32,
                                 OptimizerKind::kAdam)) {
    r.mode += "+adam";
    out.push_back(std::move(r));
  }
  for (auto& r : partition_sweep(without_biases(spec_with_bias), batch,
                                 Precision::kInt8)) {
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ezo
