// Copyright 2026 The snn-stdl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Byte-exact accounting of cached activations over (layer, step). The ledger
// counts modeled bytes (extent x element width), never allocator bytes, and
// its clock is a logical event counter so traces are reproducible.

#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stdl {

enum class LedgerKind { cache, free };

inline const char* to_string(LedgerKind k) {
  return k == LedgerKind::cache ? "cache" : "free";
}

struct LedgerEvent {
  std::size_t clock = 0;
  std::string layer;
  std::size_t step = 0;
  LedgerKind kind = LedgerKind::cache;
  std::size_t bytes = 0;
  std::size_t running = 0;
  std::size_t peak = 0;
};

class UnmatchedFree : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct PeakReport {
  std::size_t peak_bytes = 0;
  std::string peak_layer;
  std::size_t peak_step = 0;
  /// Highest running total observed at any event of the layer / step.
  std::map<std::string, std::size_t> by_layer;
  std::map<std::size_t, std::size_t> by_step;
};

class MemoryLedger {
 public:
  /// keep_events=false keeps only the running statistics, for long runs.
  explicit MemoryLedger(bool keep_events = true) : keep_events_(keep_events) {}

  void cache(const std::string& layer, std::size_t step, std::size_t bytes) {
    record(layer, step, LedgerKind::cache, bytes);
  }
  void free(const std::string& layer, std::size_t step, std::size_t bytes) {
    record(layer, step, LedgerKind::free, bytes);
  }

  void record(const std::string& layer, std::size_t step, LedgerKind kind,
              std::size_t bytes) {
    auto key = std::make_pair(layer, step);
    if (kind == LedgerKind::cache) {
      live_[key].push_back(bytes);
      running_ += bytes;
    } else {
      auto it = live_.find(key);
      if (it == live_.end() || it->second.empty() || it->second.back() != bytes) {
        throw UnmatchedFree("free of " + std::to_string(bytes) + " bytes at layer " +
                            layer + " step " + std::to_string(step) +
                            " has no matching cache");
      }
      it->second.pop_back();
      if (it->second.empty()) live_.erase(it);
      running_ -= bytes;
    }
    if (running_ > peak_) {
      peak_ = running_;
      peak_layer_ = layer;
      peak_step_ = step;
    }
    auto& bl = by_layer_[layer];
    if (running_ > bl) bl = running_;
    auto& bs = by_step_[step];
    if (running_ > bs) bs = running_;
    if (keep_events_) {
      events_.push_back({clock_, layer, step, kind, bytes, running_, peak_});
    }
    ++clock_;
  }

  std::size_t running_bytes() const { return running_; }
  std::size_t peak_bytes() const { return peak_; }
  std::pair<std::string, std::size_t> peak_location() const {
    return {peak_layer_, peak_step_};
  }
  std::size_t clock() const { return clock_; }
  std::size_t live_entries() const {
    std::size_t n = 0;
    for (const auto& [k, v] : live_) n += v.size();
    return n;
  }
  const std::vector<LedgerEvent>& events() const { return events_; }

  PeakReport peak_report() const {
    return {peak_, peak_layer_, peak_step_, by_layer_, by_step_};
  }

  void write_trace(std::ostream& os) const {
    os << "clock,layer,step,kind,bytes,running,peak\n";
    for (const auto& e : events_) {
      os << e.clock << ',' << e.layer << ',' << e.step << ',' << to_string(e.kind)
         << ',' << e.bytes << ',' << e.running << ',' << e.peak << '\n';
    }
  }

 private:
  bool keep_events_;
  std::size_t clock_ = 0;
  std::size_t running_ = 0;
  std::size_t peak_ = 0;
  std::string peak_layer_;
  std::size_t peak_step_ = 0;
  std::map<std::pair<std::string, std::size_t>, std::vector<std::size_t>> live_;
  std::map<std::string, std::size_t> by_layer_;
  std::map<std::size_t, std::size_t> by_step_;
  std::vector<LedgerEvent> events_;
};

inline void write_peak_curves(std::ostream& os, const PeakReport& r) {
  os << "axis,key,bytes\n";
  for (const auto& [layer, b] : r.by_layer) os << "layer," << layer << ',' << b << '\n';
  for (const auto& [step, b] : r.by_step) os << "step," << step << ',' << b << '\n';
  os << "peak," << r.peak_layer << '@' << r.peak_step << ',' << r.peak_bytes << '\n';
}

}  // namespace stdl
