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

// Acceptance run. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Thresholds are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stdl/stdl.hpp"
#include "stdl/verify/gradcheck.hpp"

#ifndef STDL_GOLDEN_DIR
#define STDL_GOLDEN_DIR "tests/golden"
#endif

namespace {

using namespace stdl;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// 1. Greedy partition count equals the brute-force minimum.

Outcome criterion_partition() {
  constexpr std::size_t kInstances = 200;
  constexpr double kSeconds = 5.0;
  const auto t0 = Clock::now();
  Rng rng(101);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < kInstances; ++i) {
    const std::size_t L = 1 + rng.below(12);
    std::vector<std::size_t> fps(L);
    std::size_t mx = 0, total = 0;
    for (auto& f : fps) {
      f = 1 + rng.below(8);
      mx = std::max(mx, f);
      total += f;
    }
    const std::size_t budget = mx + rng.below(total - mx + 1);
    const auto greedy = greedy_partition(fps, budget);
    const auto best = brute_force_partition(fps, budget);
    if (greedy.num_subnetworks() == best.num_subnetworks()) ++agree;
  }
  const double secs = seconds_since(t0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu/%zu optimal, %.2f s", agree, kInstances, secs);
  return {agree == kInstances && secs < kSeconds, buf};
}

// ---------------------------------------------------------------------------
// 2. BPTT against the unrolled oracle.

Outcome criterion_oracle() {
  constexpr std::size_t kCases = 50;
  constexpr double kTol = 1e-9;
  NeuronConfig lif, exact, plif, alif;
  exact.reset_grad = ResetGrad::exact;
  plif.model = NeuronModel::plif;
  alif.model = NeuronModel::alif;
  alif.reset_grad = ResetGrad::exact;
  double worst = 0;
  bool ok = true;
  for (const auto& [name, cfg] : std::vector<std::pair<std::string, NeuronConfig>>{
           {"lif", lif}, {"lif_exact", exact}, {"plif", plif}, {"alif_exact", alif}}) {
    const auto r = verify::check_bptt_oracle(name, cfg, kCases, 2, kTol);
    worst = std::max(worst, r.max_error);
    ok = ok && r.pass;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "4 neuron variants x %zu nets, max rel err %.2e (tol %.0e)",
                kCases, worst, kTol);
  return {ok, buf};
}

// ---------------------------------------------------------------------------
// 3. Regime collapse.

Outcome criterion_collapse() {
  const auto rs = verify::check_regime_collapse(50, 3, 1e-9);
  bool ok = true;
  std::string detail;
  for (const auto& r : rs) {
    ok = ok && r.pass;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s%s %.2e", detail.empty() ? "" : ", ", r.name.c_str(),
                  r.max_error);
    detail += buf;
  }
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 4. Omitted temporal terms shrink by lambda per step of gap.

Outcome criterion_decay() {
  const auto r = verify::check_temporal_decay(50, 4);
  return {r.pass, r.detail};
}

// ---------------------------------------------------------------------------
// 5. STDL peak does not depend on T; BPTT peak grows with it.

NetworkSpec small_conv_net(std::size_t T) {
  NetworkSpec s;
  s.input_shape = {1, 12, 12};
  s.num_classes = 4;
  s.timesteps = T;
  s.reference_batch = 8;
  LayerSpec enc;
  enc.kind = LayerKind::encode_conv;
  enc.channels = 4;
  LayerSpec c1;
  c1.kind = LayerKind::conv;
  c1.channels = 8;
  c1.stride = 2;
  LayerSpec c2 = c1;
  c2.channels = 8;
  c2.stride = 1;
  LayerSpec head;
  head.kind = LayerKind::classifier;
  head.channels = 4;
  s.layers = {enc, c1, c2, head};
  s.infer();
  return s;
}

std::size_t batch_peak(Regime regime, std::size_t T) {
  const auto spec = small_conv_net(T);
  const auto plan = regime == Regime::stdl
                        ? plan_stdl(spec, PartitionBudget::of_ratio(0.6), sizeof(float))
                        : trivial_plan(spec, sizeof(float));
  SpikingNetwork<float> net(spec, plan, 5);
  const auto data = synth_blobs(5, SynthSpec{8, 4, {1, 12, 12}, 0.1});
  const auto b = make_batch<float>(data, epoch_order(8, 0, 0, false), 0, 8);
  MemoryLedger ledger(false);
  run_batch(regime, net, b, T, &ledger);
  return ledger.peak_bytes();
}

Outcome criterion_constant_memory() {
  const auto t0 = Clock::now();
  std::vector<std::size_t> stdl_peaks;
  for (std::size_t T : {1, 2, 4, 6}) stdl_peaks.push_back(batch_peak(Regime::stdl, T));
  const std::size_t b1 = batch_peak(Regime::bptt, 1), b6 = batch_peak(Regime::bptt, 6);
  bool same = true;
  for (auto p : stdl_peaks) same = same && p == stdl_peaks.front();
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "stdl peaks T=1,2,4,6: " << stdl_peaks[0] << "," << stdl_peaks[1] << ","
     << stdl_peaks[2] << "," << stdl_peaks[3] << " bytes; bptt T=1 " << b1 << ", T=6 " << b6
     << "; " << std::fixed << std::setprecision(2) << secs << " s";
  return {same && b6 >= 4 * b1 && secs < 60.0, os.str()};
}

// ---------------------------------------------------------------------------
// 6. MNIST accuracy and memory parity.

constexpr std::size_t kMnistTrain = 20000;  // subset; full test split
constexpr double kMnistLr = 0.05;
constexpr double kMnistRatio = 0.7;
constexpr double kBpttFloor = 0.970;
constexpr double kStdlGap = 0.010;
constexpr double kPeakRatio = 0.6;
constexpr double kMnistMinutes = 30.0;

NetworkSpec mnist_net() {
  NetworkSpec s;
  s.input_shape = {1, 28, 28};
  s.num_classes = 10;
  s.timesteps = 4;
  s.reference_batch = 64;
  LayerSpec a;
  a.kind = LayerKind::encode_conv;
  a.channels = 16;
  a.stride = 2;
  LayerSpec b = a;
  b.kind = LayerKind::conv;
  b.channels = 32;
  LayerSpec c;
  c.kind = LayerKind::classifier;
  c.channels = 10;
  s.layers = {a, b, c};
  s.infer();
  return s;
}

Outcome criterion_mnist() {
  const auto root = data_root();
  if (!mnist_available(root)) {
    return {false, "MNIST not found under " + root + " (run tools/fetch_mnist.sh)"};
  }
  const auto t0 = Clock::now();
  const auto train_set = take(load_mnist(root, true), kMnistTrain);
  const auto test_set = load_mnist(root, false);
  const auto spec = mnist_net();
  double acc[2] = {0, 0};
  std::size_t peak[2] = {0, 0};
  for (int r = 0; r < 2; ++r) {
    const Regime regime = r == 0 ? Regime::bptt : Regime::stdl;
    const auto plan = regime == Regime::stdl
                          ? plan_stdl(spec, PartitionBudget::of_ratio(kMnistRatio), sizeof(float))
                          : trivial_plan(spec, sizeof(float));
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      SpikingNetwork<float> net(spec, plan, seed);
      TrainConfig cfg;
      cfg.regime = regime;
      cfg.lr = kMnistLr;
      cfg.seed = seed;
      MemoryLedger ledger(false);
      const auto res = train(net, train_set, test_set, cfg, ledger);
      acc[r] += res.epochs.back().test_acc / 3.0;
      peak[r] = std::max(peak[r], ledger.peak_bytes());
      std::printf("  mnist %s seed %llu: acc %.4f peak %zu (%.0f s elapsed)\n", to_string(regime),
                  static_cast<unsigned long long>(seed), res.epochs.back().test_acc,
                  ledger.peak_bytes(), seconds_since(t0));
      std::fflush(stdout);
    }
  }
  const double minutes = seconds_since(t0) / 60.0;
  const double ratio = static_cast<double>(peak[1]) / static_cast<double>(peak[0]);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "bptt mean %.4f, stdl mean %.4f (gap %.4f), peak ratio %.3f, %.1f min", acc[0],
                acc[1], acc[0] - acc[1], ratio, minutes);
  const bool ok = acc[0] >= kBpttFloor && acc[0] - acc[1] <= kStdlGap && ratio <= kPeakRatio &&
                  minutes <= kMnistMinutes;
  return {ok, buf};
}

// ---------------------------------------------------------------------------
// 7. build_auxiliary against exhaustive enumeration.

AuxSelection enumeration_best(const AuxProblem& p) {
  const auto all = enumerate_candidates(p);
  AuxSelection best = all.front();
  for (const auto& s : all) {
    if (aux_preferred(s, best)) best = s;
  }
  return best;
}

NetworkSpec random_chain(Rng& rng, std::size_t subsequent) {
  NetworkSpec n;
  n.num_classes = 2 + rng.below(4);
  n.reference_batch = 1 + rng.below(4);
  const bool spatial = rng.below(2) == 0;
  LayerSpec first;
  if (spatial) {
    n.input_shape = {1, 16, 16};
    first.kind = LayerKind::encode_conv;
  } else {
    n.input_shape = {12};
    first.kind = LayerKind::linear;
  }
  first.channels = 2 + rng.below(6);
  n.layers.push_back(first);
  for (std::size_t i = 0; i < subsequent; ++i) {
    LayerSpec l;
    l.kind = spatial ? LayerKind::conv : LayerKind::linear;
    l.channels = 2 + rng.below(10);
    n.layers.push_back(l);
  }
  LayerSpec head;
  head.kind = LayerKind::classifier;
  head.channels = n.num_classes;
  n.layers.push_back(head);
  n.infer();
  return n;
}

Outcome criterion_auxiliary() {
  constexpr std::size_t kInstances = 100;
  constexpr std::size_t width = 4;
  Rng rng(107);
  std::size_t agree = 0, deep = 0;
  for (std::size_t i = 0; i < kInstances; ++i) {
    const std::size_t sub = 1 + rng.below(16);
    const auto net = random_chain(rng, sub);
    const auto fps = layer_footprints(net, width);
    const auto part = make_partition(fps, {1, net.layers.size()}, 1u << 30);
    const std::size_t own = fps[0];
    std::size_t rest = 0;
    for (std::size_t l = 1; l < fps.size(); ++l) rest += fps[l];
    const std::size_t budget = own + rng.below(rest + 1);

    // Expected pick: first pooling factor whose enumeration reaches depth >= 1.
    const Shape& out = net.output_shape_of(1);
    const auto cand = detail::subsequent_candidates(net, 1);
    std::optional<std::pair<std::size_t, AuxSelection>> want, head_only;
    const AuxOptions opts;
    for (std::size_t f : opts.factors) {
      if (!detail::factor_divides(out, f)) continue;
      const auto p = detail::aux_problem(net, out, cand, f, budget - own, width);
      if (enumerate_candidates(p).empty()) continue;
      const auto best = enumeration_best(p);
      if (best.depth >= 1) {
        want = std::make_pair(f, best);
        break;
      }
      if (!head_only) head_only = std::make_pair(f, best);
    }
    if (!want) want = head_only;

    bool match = false;
    try {
      const auto got = build_auxiliary(net, part, 1, budget, width);
      if (want) {
        std::vector<std::size_t> chosen;
        for (auto c : want->second.chosen) chosen.push_back(cand[c]);
        match = got.downsample == want->first && got.selected == chosen &&
                got.footprint <= budget - own;
        if (got.depth > 0) ++deep;
      }
    } catch (const BudgetTooSmall&) {
      match = !want;
    }
    if (match) ++agree;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu/%zu match enumeration (%zu with depth >= 1)", agree,
                kInstances, deep);
  return {agree == kInstances, buf};
}

// ---------------------------------------------------------------------------
// 8. CKA and probe sanity.

Tensor<double> gaussian(std::uint64_t seed, std::size_t n, std::size_t d) {
  Rng rng(seed);
  Tensor<double> x({n, d});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
  return x;
}

Tensor<double> rows(const Tensor<double>& a, std::size_t from, std::size_t to) {
  const std::size_t d = a.dim(1);
  Tensor<double> out({to - from, d});
  std::copy(a.ptr() + from * d, a.ptr() + to * d, out.ptr());
  return out;
}

Tensor<double> flat(const Dataset& ds) {
  const std::size_t d = ds.images.size() / ds.size();
  Tensor<double> x({ds.size(), d});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = ds.images[i];
  return x;
}

Outcome criterion_analysis() {
  constexpr double kCkaTol = 1e-9;
  const auto X = gaussian(81, 200, 6);
  const double self = linear_cka(X, X);
  // Orthogonal Q from Gram-Schmidt on a random matrix, then scaled.
  auto Q = gaussian(82, 6, 6);
  for (std::size_t j = 0; j < 6; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double dot = 0;
      for (std::size_t i = 0; i < 6; ++i) dot += Q[i * 6 + j] * Q[i * 6 + k];
      for (std::size_t i = 0; i < 6; ++i) Q[i * 6 + j] -= dot * Q[i * 6 + k];
    }
    double nrm = 0;
    for (std::size_t i = 0; i < 6; ++i) nrm += Q[i * 6 + j] * Q[i * 6 + j];
    for (std::size_t i = 0; i < 6; ++i) Q[i * 6 + j] /= std::sqrt(nrm);
  }
  Tensor<double> XQ({200, 6});
  gemm(Trans::no, Trans::no, 200, 6, 6, 1.0, X.ptr(), Q.ptr(), 0.0, XQ.ptr());
  Tensor<double> cX = X;
  cX *= -2.5;
  const auto Y = gaussian(83, 200, 9);
  const double rot = std::fabs(linear_cka(XQ, Y) - linear_cka(X, Y));
  const double scl = std::fabs(linear_cka(cX, Y) - linear_cka(X, Y));
  const double xq = std::fabs(linear_cka(X, XQ) - 1.0);

  const auto blobs = synth_blobs(84, SynthSpec{600, 3, {1, 4, 4}, 0.05});
  const auto F = flat(blobs);
  const std::vector<int> ytr(blobs.labels.begin(), blobs.labels.begin() + 300);
  const std::vector<int> yte(blobs.labels.begin() + 300, blobs.labels.end());
  const double sep = linear_probe(rows(F, 0, 300), ytr, rows(F, 300, 600), yte, 3);

  const auto two = synth_blobs(85, SynthSpec{2000, 2, {1, 4, 4}, 0.05});
  auto shuffled = two.labels;
  Rng(86).shuffle(shuffled);
  const auto G = flat(two);
  const std::vector<int> str(shuffled.begin(), shuffled.begin() + 1000);
  const std::vector<int> ste(shuffled.begin() + 1000, shuffled.end());
  const double perm = linear_probe(rows(G, 0, 1000), str, rows(G, 1000, 2000), ste, 2);
  const double sigma = std::sqrt(0.5 * 0.5 / 1000.0);

  const bool ok = std::fabs(self - 1.0) <= kCkaTol && rot <= kCkaTol && scl <= kCkaTol &&
                  xq <= kCkaTol && sep >= 0.99 && std::fabs(perm - 0.5) <= 3 * sigma;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "cka self-1 %.1e, rotation %.1e, scale %.1e; probe blobs %.4f, permuted %.4f "
                "(chance 0.5 +- %.4f)",
                std::fabs(self - 1.0), std::max(rot, xq), scl, sep, perm, 3 * sigma);
  return {ok, buf};
}

// ---------------------------------------------------------------------------
// 9. File formats.

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::pair<std::string, std::string> tiny_run_outputs() {
  const auto data = synth_blobs(91, SynthSpec{96, 3, {1, 6, 6}, 0.1});
  NetworkSpec s;
  s.input_shape = {1, 6, 6};
  s.num_classes = 3;
  s.timesteps = 4;
  s.reference_batch = 16;
  LayerSpec enc;
  enc.kind = LayerKind::encode_conv;
  enc.channels = 8;
  LayerSpec lin;
  lin.kind = LayerKind::linear;
  lin.channels = 24;
  LayerSpec head;
  head.kind = LayerKind::classifier;
  head.channels = 3;
  s.layers = {enc, lin, head};
  s.infer();
  const auto plan = plan_stdl(s, PartitionBudget::of_ratio(0.75), sizeof(float));
  SpikingNetwork<float> net(s, plan, 91);
  TrainConfig cfg;
  cfg.regime = Regime::stdl;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.lr = 0.05;
  cfg.seed = 91;
  MemoryLedger ledger;
  std::ostringstream metrics;
  write_metrics_header(metrics);
  train(net, data, data, cfg, ledger, [&](const EpochMetrics& m) {
    EpochMetrics copy = m;
    copy.wall_seconds = 0;  // timing is not reproducible
    write_metrics_row(metrics, copy);
  });
  // The trace of the first batch is enough for a golden file.
  MemoryLedger first;
  SpikingNetwork<float> fresh(s, plan, 91);
  const auto b = make_batch<float>(data, epoch_order(96, 91, 1), 0, 16);
  stdl_batch(fresh, b, s.timesteps, &first);
  std::ostringstream trace;
  first.write_trace(trace);
  return {metrics.str(), trace.str()};
}

Outcome criterion_formats() {
  const IdxArray img{kIdxImagesMagic, {2, 2, 3}, {0, 255, 128, 1, 2, 3, 9, 8, 7, 6, 5, 4}};
  const auto bytes = serialize_idx(img);
  const bool idx_ok = serialize_idx(parse_idx(bytes, kIdxImagesMagic)) == bytes;
  auto bad = bytes;
  bad[3] = 0x01;  // labels magic where images are expected
  bool magic_ok = false;
  try {
    parse_idx(bad, kIdxImagesMagic);
  } catch (const BadMagic&) {
    magic_ok = true;
  }
  const auto run1 = tiny_run_outputs();
  const auto run2 = tiny_run_outputs();
  const bool stable = run1 == run2;
  std::printf("  tiny run metrics:\n%s", run1.first.c_str());
  const std::string golden_path = std::string(STDL_GOLDEN_DIR) + "/stdl_tiny_trace.csv";
  const bool golden = slurp(golden_path) == run1.second;
  std::ostringstream os;
  os << "idx round trip " << (idx_ok ? "ok" : "BAD") << ", bad magic "
     << (magic_ok ? "rejected" : "ACCEPTED") << ", two runs " << (stable ? "identical" : "DIFFER")
     << ", trace vs " << golden_path << (golden ? " equal" : " DIFFERS");
  return {idx_ok && magic_ok && stable && golden, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  // --write-golden regenerates the committed trace fixture.
  if (argc > 1 && std::string(argv[1]) == "--write-golden") {
    std::ofstream(std::string(STDL_GOLDEN_DIR) + "/stdl_tiny_trace.csv")
        << tiny_run_outputs().second;
    return 0;
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"partition optimality", criterion_partition},
      {"gradient oracle equivalence", criterion_oracle},
      {"regime collapse identities", criterion_collapse},
      {"temporal truncation decay", criterion_decay},
      {"constant memory in T", criterion_constant_memory},
      {"MNIST accuracy and memory parity", criterion_mnist},
      {"auxiliary construction", criterion_auxiliary},
      {"analysis sanity", criterion_analysis},
      {"format fidelity", criterion_formats},
  };
  // Optional criterion numbers select a subset.
  std::set<std::size_t> only;
  for (int a = 1; a < argc; ++a) only.insert(std::stoul(argv[a]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
