// Copyright 2026 The ezo Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ezo/instrumentation.h"

namespace ezo {

namespace {
thread_local Counters tls_counters;
}  // namespace

Counters& counters() { return tls_counters; }

void reset_counters() { tls_counters = Counters{}; }

}  // namespace ezo
