// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <vector>

namespace ezo {

namespace {

constexpr char kMagic[4] = {'E', 'Z', 'O', '1'};

class Writer {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) {
    for (int k = 0; k < 2; ++k) u8(static_cast<uint8_t>(v >> (8 * k)));
  }
  void u32(uint32_t v) {
    for (int k = 0; k < 4; ++k) u8(static_cast<uint8_t>(v >> (8 * k)));
  }
  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
  void raw(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write checkpoint " + path);
    f.write(reinterpret_cast<const char*>(buf_.data()),
            static_cast<std::streamsize>(buf_.size()));
    if (!f) throw std::runtime_error("error writing checkpoint " + path);
  }

 private:
  std::vector<uint8_t> buf_;
};

class Reader {
 public:
  Reader(std::vector<uint8_t> data, std::string path)
      : data_(std::move(data)), path_(std::move(path)) {}

  uint8_t u8() { return take(1)[0]; }
  uint16_t u16() {
    const uint8_t* p = take(2);
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
  }
  uint32_t u32() {
    const uint8_t* p = take(4);
    return uint32_t{p[0]} | (uint32_t{p[1]} << 8) | (uint32_t{p[2]} << 16) |
           (uint32_t{p[3]} << 24);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  const uint8_t* take(size_t n) {
    if (data_.size() - pos_ < n) fail("truncated");
    const uint8_t* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  void expect_end() {
    if (pos_ != data_.size()) fail("trailing bytes");
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("checkpoint " + path_ + ": " + what);
  }

 private:
  std::vector<uint8_t> data_;
  std::string path_;
  size_t pos_ = 0;
};

void write_header(Writer& w, Precision p, bool bias, const Shape& input,
                  const std::vector<LayerSpec>& layers) {
  w.raw(kMagic, 4);
  w.u8(p == Precision::kFp32 ? 0 : 1);
  w.u8(bias ? 1 : 0);
  w.u32(static_cast<uint32_t>(input.size()));
  for (size_t d : input) w.u32(static_cast<uint32_t>(d));
  w.u32(static_cast<uint32_t>(layers.size()));
  for (const auto& l : layers) {
    w.u8(static_cast<uint8_t>(l.kind));
    w.u32(l.in);
    w.u32(l.out);
    w.u32(l.kernel);
    w.u32(l.pad);
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const Network& net) {
  Writer w;
  write_header(w, Precision::kFp32, net.with_bias(), net.input_shape(),
               net.layers());
  for (size_t i : net.trainable_layers()) {
    for (float v : net.params(i).weight.values()) w.f32(v);
    for (float v : net.params(i).bias.values()) w.f32(v);
  }
  w.save(path);
}

void save_checkpoint(const std::string& path, const QuantNetwork& net) {
  Writer w;
  write_header(w, Precision::kInt8, false, net.input_shape(), net.layers());
  for (size_t i : net.trainable_layers()) {
    const QuantTensor& q = net.weight(i);
    w.u16(static_cast<uint16_t>(static_cast<int16_t>(q.exponent)));
    w.raw(q.data.data(), q.data.size());
  }
  w.save(path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint " + path);
  Reader r(std::vector<uint8_t>(std::istreambuf_iterator<char>(f), {}), path);
  if (std::memcmp(r.take(4), kMagic, 4) != 0) r.fail("bad magic");
  const uint8_t prec = r.u8();
  if (prec > 1) r.fail("unknown precision byte");
  const bool bias = r.u8() != 0;
  const uint32_t rank = r.u32();
  if (rank == 0 || rank > 3) r.fail("bad input rank");
  Shape input(rank);
  for (auto& d : input) d = r.u32();
  const uint32_t n = r.u32();
  if (n == 0 || n > 4096) r.fail("bad layer count");
  std::vector<LayerSpec> layers(n);
  for (auto& l : layers) {
    const uint8_t kind = r.u8();
    if (kind < 1 || kind > 5) r.fail("unknown layer kind");
    l.kind = static_cast<LayerKind>(kind);
    l.in = r.u32();
    l.out = r.u32();
    l.kernel = r.u32();
    l.pad = r.u32();
  }

  Checkpoint ck;
  if (prec == 0) {
    ck.precision = Precision::kFp32;
    Network net(input, layers, bias);
    for (size_t i : net.trainable_layers()) {
      for (float& v : net.params(i).weight.values()) v = r.f32();
      for (float& v : net.params(i).bias.values()) v = r.f32();
    }
    ck.fp32.emplace(std::move(net));
  } else {
    if (bias) r.fail("int8 checkpoints carry no biases");
    ck.precision = Precision::kInt8;
    std::optional<QuantNetwork> net;
    for (size_t i = 0; i < layers.size(); ++i) {
      if (!layers[i].has_params()) continue;
      const int exponent = static_cast<int16_t>(r.u16());
      if (!net) net.emplace(input, layers, exponent);
      if (net->weight(i).exponent != exponent) {
        r.fail("per-layer parameter exponents differ");
      }
      const size_t count = net->weight(i).size();
      const auto* p = reinterpret_cast<const int8_t*>(r.take(count));
      for (size_t k = 0; k < count; ++k) {
        if (p[k] == -128) r.fail("int8 weight -128");
      }
      net->set_weights(i, std::span<const int8_t>(p, count));
    }
    if (!net) net.emplace(input, layers);
    ck.int8 = std::move(net);
  }
  r.expect_end();
  return ck;
}

}  // namespace ezo
