// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/memmodel.h"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ezo {

uint64_t ShapeSpec::total_params() const {
  uint64_t n = 0;
  for (const auto& l : layers) n += l.params;
  return n;
}

ShapeSpec make_shape_spec(const Shape& input, std::span<const LayerSpec> layers,
                          bool with_bias) {
  const std::vector<Shape> shapes = infer_shapes(input, layers);
  ShapeSpec spec;
  for (size_t i = 0; i < layers.size(); ++i) {
    ShapeSpec::Layer l;
    l.kind = layers[i].kind;
    l.trainable = layers[i].has_params();
    l.biases = with_bias ? layers[i].bias_count() : 0;
    l.params = layers[i].weight_count() + l.biases;
    l.input = shape_size(shapes[i]);
    l.activation = l.kind == LayerKind::kFlatten ? 0 : shape_size(shapes[i + 1]);
    spec.layers.push_back(l);
  }
  return spec;
}

ShapeSpec without_biases(ShapeSpec spec) {
  for (auto& l : spec.layers) {
    l.params -= l.biases;
    l.biases = 0;
  }
  return spec;
}

ShapeSpec parse_shape_spec(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Shape input;
  std::vector<LayerSpec> layers;
  bool bias = true;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("shape spec line " + std::to_string(lineno) +
                                ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    std::vector<long long> v;
    for (long long x; ls >> x;) {
      if (x < 0) fail("negative dimension");
      v.push_back(x);
    }
    if (!ls.eof()) fail("non-numeric argument");
    auto want = [&](size_t n) {
      if (v.size() != n) {
        fail(kind + " takes " + std::to_string(n) + " arguments");
      }
    };
    auto u = [&](size_t k) { return static_cast<uint32_t>(v[k]); };
    if (kind == "input") {
      if (v.empty() || v.size() > 3) fail("input takes 1 to 3 dimensions");
      input.assign(v.begin(), v.end());
    } else if (kind == "bias") {
      want(1);
      bias = v[0] != 0;
    } else if (kind == "conv") {
      want(4);
      layers.push_back(LayerSpec::conv2d(u(0), u(1), u(2), u(3)));
    } else if (kind == "fc") {
      want(2);
      layers.push_back(LayerSpec::fc(u(0), u(1)));
    } else if (kind == "relu") {
      want(0);
      layers.push_back(LayerSpec::relu());
    } else if (kind == "pool") {
      want(1);
      layers.push_back(LayerSpec::maxpool2d(u(0)));
    } else if (kind == "flatten") {
      want(0);
      layers.push_back(LayerSpec::flatten());
    } else {
      fail("unknown layer kind '" + kind + "'");
    }
  }
  if (input.empty()) throw std::invalid_argument("shape spec has no input line");
  if (layers.empty()) throw std::invalid_argument("shape spec has no layers");
  return make_shape_spec(input, layers, bias);
}

ShapeSpec load_shape_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open shape spec " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_shape_spec(ss.str());
}

namespace {

void check_args(const ShapeSpec& spec, size_t batch, size_t partition) {
  if (batch == 0) throw std::invalid_argument("batch size must be >= 1");
  if (partition > spec.num_layers()) {
    throw std::invalid_argument("partition " + std::to_string(partition) +
                                " exceeds layer count " +
                                std::to_string(spec.num_layers()));
  }
}

std::string mode_name(const ShapeSpec& spec, size_t c) {
  if (c == 0) return "full_bp";
  if (c == spec.num_layers()) return "full_zo";
  return "elastic(" + std::to_string(c) + ")";
}

void finish(MemoryReport& r) {
  r.total = r.params + r.activations + r.grads + r.errors + r.int32_scratch +
            r.optimizer_state;
}

}  // namespace

MemoryReport mem_fp32(const ShapeSpec& spec, size_t batch, size_t partition,
                      OptimizerKind opt) {
  check_args(spec, batch, partition);
  MemoryReport r;
  r.mode = mode_name(spec, partition);
  r.precision = Precision::kFp32;
  r.partition = partition;
  for (size_t i = 0; i < spec.num_layers(); ++i) {
    const auto& l = spec.layers[i];
    r.params += 4 * l.params;
    r.activations += 4 * l.activation * batch;
    if (i >= partition) {
      r.errors += 4 * l.activation * batch;
      if (l.trainable) r.grads += 4 * l.params;
    }
  }
  if (opt == OptimizerKind::kAdam) r.optimizer_state = 2 * r.grads;
  finish(r);
  return r;
}

MemoryReport mem_int8(const ShapeSpec& spec, size_t batch, size_t partition) {
  check_args(spec, batch, partition);
  MemoryReport r;
  r.mode = mode_name(spec, partition);
  r.precision = Precision::kInt8;
  r.partition = partition;
  for (size_t i = 0; i < spec.num_layers(); ++i) {
    const auto& l = spec.layers[i];
    r.params += l.params;
    r.activations += l.activation * batch;
    if (l.trainable) r.int32_scratch += 4 * l.activation * batch;
    if (i >= partition) {
      r.errors += l.activation * batch;
      if (l.trainable) {
        r.grads += l.params;
        r.int32_scratch += 4 * l.params;
        if (i > partition) r.int32_scratch += 4 * l.input * batch;
      }
    }
  }
  finish(r);
  return r;
}

std::vector<MemoryReport> partition_sweep(const ShapeSpec& spec, size_t batch,
                                          Precision precision,
                                          OptimizerKind opt) {
  std::vector<MemoryReport> out;
  for (size_t c = 0; c <= spec.num_layers(); ++c) {
    out.push_back(precision == Precision::kFp32 ? mem_fp32(spec, batch, c, opt)
                                                : mem_int8(spec, batch, c));
  }
  return out;
}

std::string memory_csv(std::span<const MemoryReport> reports) {
  std::ostringstream os;
  os << "# ezo memreport v1 (bytes)\n"
     << "precision,mode,partition,params,activations,grads,errors,"
        "int32_scratch,optimizer_state,total\n";
  for (const auto& r : reports) {
    os << to_string(r.precision) << ',' << r.mode << ',' << r.partition << ','
       << r.params << ',' << r.activations << ',' << r.grads << ','
       << r.errors << ',' << r.int32_scratch << ',' << r.optimizer_state << ','
       << r.total << '\n';
  }
  return os.str();
}

std::string memory_table(std::span<const MemoryReport> reports) {
  std::ostringstream os;
  auto kib = [](uint64_t b) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << static_cast<double>(b) / 1024.0;
    return s.str();
  };
  os << std::left << std::setw(6) << "prec" << std::setw(19) << "mode"
     << std::right;
  for (const char* h : {"params", "acts", "grads", "errors", "int32", "optim",
                        "total KiB"}) {
    os << std::setw(11) << h;
  }
  os << '\n';
  for (const auto& r : reports) {
    os << std::left << std::setw(6) << to_string(r.precision) << std::setw(19)
       << r.mode << std::right;
    for (uint64_t b : {r.params, r.activations, r.grads, r.errors,
                       r.int32_scratch, r.optimizer_state, r.total}) {
      os << std::setw(11) << kib(b);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace ezo
