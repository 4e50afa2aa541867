// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Thread-local counters used by tests to observe what a training step did:
// how many forward passes ran, whether gradient/error buffers were created,
// and how many floating-point operations the instrumented INT8 helpers ran.

#ifndef EZO_INSTRUMENTATION_H_
#define EZO_INSTRUMENTATION_H_

#include <chrono>
#include <cstdint>

namespace ezo {

struct Counters {
  uint64_t forward_passes = 0;
  // Parameter-gradient and error tensors created by backward passes.
  uint64_t gradient_buffers = 0;
  uint64_t gradient_bytes = 0;
  // Largest activation-cache + gradient + error footprint seen in one step.
  uint64_t peak_aux_bytes = 0;
  // Floating-point arithmetic executed by INT8-side helpers (dequantization,
  // the float reference sign). Integer-only training leaves this at zero.
  uint64_t float_ops = 0;
};

Counters& counters();
void reset_counters();

// Wall time per training phase, in nanoseconds (integers, so the INT8 path
// stays free of floating point even when timed).
struct PhaseTimes {
  int64_t forward = 0;
  int64_t zo_perturb = 0;
  int64_t zo_update = 0;
  int64_t bp_backward = 0;
  int64_t loss = 0;

  PhaseTimes& operator+=(const PhaseTimes& o) {
    forward += o.forward;
    zo_perturb += o.zo_perturb;
    zo_update += o.zo_update;
    bp_backward += o.bp_backward;
    loss += o.loss;
    return *this;
  }
};

// Adds the lifetime of the scope to *slot; a null slot disables timing.
class ScopedPhase {
 public:
  explicit ScopedPhase(int64_t* slot)
      : slot_(slot), start_(std::chrono::steady_clock::now()) {}
  ~ScopedPhase() {
    if (slot_ != nullptr) {
      *slot_ += std::chrono::duration_cast<std::chrono::nanoseconds>(
                    std::chrono::steady_clock::now() - start_)
                    .count();
    }
  }
  ScopedPhase(const ScopedPhase&) = delete;
  ScopedPhase& operator=(const ScopedPhase&) = delete;

 private:
  int64_t* slot_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ezo

#endif  // EZO_INSTRUMENTATION_H_
