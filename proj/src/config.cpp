// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ezo/layers.h"

namespace ezo {

std::string to_string(Precision p) {
  return p == Precision::kFp32 ? "fp32" : "int8";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value,
                      const std::string& why) {
  throw std::invalid_argument("config field '" + key + "': cannot use '" +
                              value + "' (" + why + ")");
}

template <typename T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, v, "not an integer");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) bad(key, v, "not a number");
    return d;
  } catch (const std::logic_error&) {
    bad(key, v, "not a number");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  bad(key, v, "expected true or false");
}

// "0:5,20:4,50:3"
template <typename T, typename Parse>
Schedule<T> parse_schedule(const std::string& key, const std::string& v,
                           Parse parse) {
  Schedule<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto colon = item.find(':');
    if (colon == std::string::npos) bad(key, v, "expected epoch:value pairs");
    out.emplace_back(parse_int<int>(key, trim(item.substr(0, colon))),
                     parse(key, trim(item.substr(colon + 1))));
  }
  if (out.empty()) bad(key, v, "empty schedule");
  return out;
}

template <typename T>
std::string schedule_string(const Schedule<T>& s) {
  std::ostringstream os;
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ',';
    os << s[i].first << ':' << s[i].second;
  }
  return os.str();
}

}  // namespace

void apply_setting(RunConfig& c, const std::string& raw_key,
                   const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  auto real = [&] { return parse_real(key, v); };
  if (key == "precision") {
    if (v == "fp32") c.precision = Precision::kFp32;
    else if (v == "int8") c.precision = Precision::kInt8;
    else bad(key, v, "expected fp32 or int8");
  } else if (key == "mode") {
    parse_training_mode(v);  // validates
    c.mode = v;
  } else if (key == "partition") {
    if (v.empty() || v == "none") c.partition.reset();
    else c.partition = parse_int<size_t>(key, v);
  } else if (key == "epochs") {
    c.epochs = parse_int<int>(key, v);
  } else if (key == "batch") {
    c.batch = parse_int<size_t>(key, v);
  } else if (key == "seed") {
    c.seed = parse_int<uint32_t>(key, v);
  } else if (key == "train_subset") {
    c.train_subset = parse_int<size_t>(key, v);
  } else if (key == "test_subset") {
    c.test_subset = parse_int<size_t>(key, v);
  } else if (key == "eval_batch") {
    c.eval_batch = parse_int<size_t>(key, v);
  } else if (key == "lr") {
    c.lr = static_cast<float>(real());
  } else if (key == "lr_bp") {
    if (v.empty() || v == "none") c.lr_bp.reset();
    else c.lr_bp = static_cast<float>(real());
  } else if (key == "lr_decay") {
    c.lr_decay = static_cast<float>(real());
  } else if (key == "lr_decay_every") {
    c.lr_decay_every = parse_int<int>(key, v);
  } else if (key == "eps") {
    c.eps = static_cast<float>(real());
  } else if (key == "g_clip") {
    if (v == "none") c.g_clip.reset();
    else c.g_clip = static_cast<float>(real());
  } else if (key == "optimizer") {
    if (v != "sgd" && v != "adam") bad(key, v, "expected sgd or adam");
    c.optimizer = v;
  } else if (key == "bp_source") {
    if (v != "minus" && v != "plus" && v != "third") {
      bad(key, v, "expected minus, plus or third");
    }
    c.bp_source = v;
  } else if (key == "merge") {
    c.merge = parse_bool(key, v);
  } else if (key == "r_max") {
    c.r_max = parse_int<int>(key, v);
  } else if (key == "b_zo") {
    c.b_zo = parse_int<int>(key, v);
  } else if (key == "b_bp") {
    c.b_bp = parse_schedule<int>(key, v, parse_int<int>);
  } else if (key == "p_zero") {
    c.p_zero = parse_schedule<double>(key, v, parse_real);
  } else if (key == "sign_mode") {
    if (v != "integer" && v != "float_reference") {
      bad(key, v, "expected integer or float_reference");
    }
    c.sign_mode = v;
  } else if (key == "param_exponent") {
    c.param_exponent = parse_int<int>(key, v);
  } else if (key == "r_init") {
    c.r_init = parse_int<int>(key, v);
  } else if (key == "ce_frac_bits") {
    c.ce_frac_bits = parse_int<int>(key, v);
  } else if (key == "checkpoint") {
    c.checkpoint = v;
  } else if (key == "angle") {
    c.angle = real();
  } else if (key == "finetune_train") {
    c.finetune_train = parse_int<size_t>(key, v);
  } else if (key == "finetune_test") {
    c.finetune_test = parse_int<size_t>(key, v);
  } else if (key == "data_dir") {
    c.data_dir = v;
  } else if (key == "out_dir") {
    c.out_dir = v;
  } else {
    throw std::invalid_argument("unknown config field '" + key + "'");
  }
}

void apply_assignment(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("expected key=value, got '" + assignment + "'");
  }
  apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_assignment(cfg, line);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " +
                                  e.what());
    }
  }
}

void RunConfig::validate() const {
  std::vector<std::string> errors;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  need(epochs >= 0, "epochs must be >= 0");
  need(batch >= 1, "batch must be >= 1");
  need(eval_batch >= 1, "eval_batch must be >= 1");
  need(lr > 0, "lr must be > 0");
  need(!lr_bp || *lr_bp > 0, "lr_bp must be > 0");
  need(lr_decay > 0 && lr_decay <= 1, "lr_decay must lie in (0, 1]");
  need(lr_decay_every >= 1, "lr_decay_every must be >= 1");
  need(eps > 0, "eps must be > 0");
  need(!g_clip || *g_clip > 0, "g_clip must be > 0");
  need(r_max >= 1 && r_max <= 127, "r_max must lie in [1, 127]");
  need(b_zo >= 1 && b_zo <= 7, "b_zo must lie in [1, 7]");
  need(r_init >= 0 && r_init <= 127, "r_init must lie in [0, 127]");
  need(ce_frac_bits == 0 || ce_frac_bits == 4, "ce_frac_bits must be 0 or 4");
  need(std::is_sorted(b_bp.begin(), b_bp.end()) && !b_bp.empty() &&
           b_bp.front().first == 0,
       "b_bp schedule must be epoch-sorted and start at epoch 0");
  for (const auto& [e, b] : b_bp) need(b >= 1 && b <= 7, "b_bp values must lie in [1, 7]");
  need(std::is_sorted(p_zero.begin(), p_zero.end()) && !p_zero.empty() &&
           p_zero.front().first == 0,
       "p_zero schedule must be epoch-sorted and start at epoch 0");
  for (const auto& [e, p] : p_zero) need(p >= 0 && p <= 1, "p_zero values must lie in [0, 1]");
  need(angle > -360 && angle < 360, "angle must lie in (-360, 360)");
  need(finetune_train >= 1 && finetune_test >= 1,
       "finetune_train and finetune_test must be >= 1");
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
}

std::string dump_config(const RunConfig& c) {
  std::map<std::string, std::string> kv;
  auto num = [](double d) {
    std::ostringstream os;
    os << d;
    return os.str();
  };
  kv["precision"] = to_string(c.precision);
  kv["mode"] = c.mode;
  kv["partition"] = c.partition ? std::to_string(*c.partition) : "none";
  kv["epochs"] = std::to_string(c.epochs);
  kv["batch"] = std::to_string(c.batch);
  kv["seed"] = std::to_string(c.seed);
  kv["train_subset"] = std::to_string(c.train_subset);
  kv["test_subset"] = std::to_string(c.test_subset);
  kv["eval_batch"] = std::to_string(c.eval_batch);
  kv["lr"] = num(c.lr);
  kv["lr_bp"] = c.lr_bp ? num(*c.lr_bp) : "none";
  kv["lr_decay"] = num(c.lr_decay);
  kv["lr_decay_every"] = std::to_string(c.lr_decay_every);
  kv["eps"] = num(c.eps);
  kv["g_clip"] = c.g_clip ? num(*c.g_clip) : "none";
  kv["optimizer"] = c.optimizer;
  kv["bp_source"] = c.bp_source;
  kv["merge"] = c.merge ? "true" : "false";
  kv["r_max"] = std::to_string(c.r_max);
  kv["b_zo"] = std::to_string(c.b_zo);
  kv["b_bp"] = schedule_string(c.b_bp);
  kv["p_zero"] = schedule_string(c.p_zero);
  kv["sign_mode"] = c.sign_mode;
  kv["param_exponent"] = std::to_string(c.param_exponent);
  kv["r_init"] = std::to_string(c.r_init);
  kv["ce_frac_bits"] = std::to_string(c.ce_frac_bits);
  kv["checkpoint"] = c.checkpoint;
  kv["angle"] = num(c.angle);
  kv["finetune_train"] = std::to_string(c.finetune_train);
  kv["finetune_test"] = std::to_string(c.finetune_test);
  kv["data_dir"] = c.data_dir;
  kv["out_dir"] = c.out_dir;
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

float scheduled_lr(const RunConfig& cfg, int epoch) {
  const int steps = epoch / cfg.lr_decay_every;
  float lr = cfg.lr;
  for (int i = 0; i < steps; ++i) lr *= cfg.lr_decay;
  return lr;
}

}  // namespace ezo
