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

// Command-line front end: partition | train | gradcheck | trace | probe | cka.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stdl/stdl.hpp"
#include "stdl/verify/gradcheck.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stdl;

namespace {

// Failures carry an exit code and a machine-readable record.
struct CliFailure {
  int code;
  json record;
};

struct Flags {
  std::string config;
  std::optional<std::string> network, dataset, data_root, regime, precision, out, checkpoint,
      against;
  std::optional<double> budget_ratio, lr, momentum, weight_decay;
  std::optional<std::size_t> budget_bytes, timesteps, epochs, batch_size, train_limit, test_limit;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> footprints;
  std::size_t cases = 50;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("-c,--config", f.config, "run config (JSON)");
  sub->add_option("--network", f.network, "network description (JSON)");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed);
  sub->add_option("--precision", f.precision, "float32 | float64");
}

void add_data(CLI::App* sub, Flags& f) {
  sub->add_option("--dataset", f.dataset, "mnist | synth");
  sub->add_option("--data-root", f.data_root, "MNIST directory (else $STDL_DATA_ROOT)");
  sub->add_option("--train-limit", f.train_limit, "use the first N training samples");
  sub->add_option("--test-limit", f.test_limit, "use the first N test samples");
}

void add_budget(CLI::App* sub, Flags& f) {
  auto* r = sub->add_option("--budget-ratio", f.budget_ratio, "budget as a fraction of the network");
  auto* b = sub->add_option("--budget-bytes", f.budget_bytes, "absolute budget");
  r->excludes(b);
  sub->add_option("--regime", f.regime, "bptt | stdl | sltt");
  sub->add_option("-T,--timesteps", f.timesteps);
}

void add_train(CLI::App* sub, Flags& f) {
  sub->add_option("--epochs", f.epochs);
  sub->add_option("--batch-size", f.batch_size);
  sub->add_option("--lr", f.lr);
  sub->add_option("--momentum", f.momentum);
  sub->add_option("--weight-decay", f.weight_decay);
}

std::string resolve_against(const std::string& base_dir, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || base_dir.empty()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

// Config file first, flags on top.
RunConfig resolve_config(const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) {
    cfg = load_run_config(f.config);
    const std::string dir = fs::path(f.config).parent_path().string();
    cfg.network = resolve_against(dir, cfg.network);
    cfg.checkpoint = resolve_against(dir, cfg.checkpoint);
    cfg.against = resolve_against(dir, cfg.against);
  }
  json patch = json::object();
  if (f.network) patch["network"] = *f.network;
  if (!f.footprints.empty()) patch["footprints"] = f.footprints;
  json data = json::object();
  if (f.dataset) data["name"] = *f.dataset;
  if (f.data_root) data["root"] = *f.data_root;
  if (f.train_limit) data["train_limit"] = *f.train_limit;
  if (f.test_limit) data["test_limit"] = *f.test_limit;
  if (!data.empty()) patch["dataset"] = data;
  if (f.regime) patch["regime"] = *f.regime;
  if (f.budget_ratio) patch["budget"] = {{"mode", "ratio"}, {"value", *f.budget_ratio}};
  if (f.budget_bytes) patch["budget"] = {{"mode", "bytes"}, {"value", *f.budget_bytes}};
  if (f.timesteps) patch["timesteps"] = *f.timesteps;
  json train = json::object();
  if (f.epochs) train["epochs"] = *f.epochs;
  if (f.batch_size) train["batch_size"] = *f.batch_size;
  if (f.lr) train["lr"] = *f.lr;
  if (f.momentum) train["momentum"] = *f.momentum;
  if (f.weight_decay) train["weight_decay"] = *f.weight_decay;
  if (!train.empty()) patch["train"] = train;
  if (f.precision) patch["precision"] = *f.precision;
  if (f.out) patch["output_dir"] = *f.out;
  if (f.checkpoint) patch["checkpoint"] = *f.checkpoint;
  if (f.against) patch["against"] = *f.against;
  if (f.seed) patch["seed"] = *f.seed;
  else patch["seed"] = cfg.seed;  // keeps train.seed in step
  merge_run_config(cfg, patch);
  cfg.validate();
  return cfg;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) {
    throw CliFailure{2, {{"error", "config"}, {"field", what}, {"message", what + " is not set"}}};
  }
  if (!fs::exists(path)) {
    throw CliFailure{2,
                     {{"error", "missing_file"},
                      {"field", what},
                      {"path", path},
                      {"message", what + " '" + path + "' does not exist"}}};
  }
}

json versions() {
  return {{"stdl", kLibraryVersion},
          {"rng", std::string(Rng::kAlgorithm)},
          {"compiler", __VERSION__},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

fs::path prepare_output(const RunConfig& cfg, const std::string& command) {
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  json j = to_json(cfg);
  j["command"] = command;
  j["versions"] = versions();
  std::ofstream(out / "config.json") << j.dump(2) << '\n';
  return out;
}

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2) << '\n'; }

NetworkSpec load_net(const RunConfig& cfg) {
  require_file(cfg.network, "network");
  auto spec = load_network(cfg.network);
  if (cfg.timesteps != 0) spec.timesteps = cfg.timesteps;
  return spec;
}

std::string boundary_string(const Partition& p) {
  std::string s = "P={";
  for (std::size_t i = 0; i < p.boundaries.size(); ++i) {
    s += (i ? "," : "") + std::to_string(p.boundaries[i]);
  }
  return s + "}";
}

// Synthetic blobs drawn once and split, so both halves share class centres.
std::pair<Dataset, Dataset> synth_split(const RunConfig& cfg, const Shape& shape) {
  SynthSpec s;
  s.samples = 2 * cfg.synth_samples;
  s.classes = cfg.synth_classes;
  s.noise = cfg.synth_noise;
  s.shape = shape;
  const auto all = synth_blobs(cfg.seed, s);
  const std::size_t n = cfg.synth_samples, per = all.images.size() / all.size();
  Dataset tr = take(all, n), te = take(all, n);
  std::copy(all.images.ptr() + n * per, all.images.ptr() + 2 * n * per, te.images.ptr());
  std::copy(all.labels.begin() + static_cast<std::ptrdiff_t>(n), all.labels.end(),
            te.labels.begin());
  tr.split = "train";
  te.split = "test";
  return {tr, te};
}

std::pair<Dataset, Dataset> load_data(const RunConfig& cfg, const NetworkSpec& spec) {
  Dataset tr, te;
  if (cfg.dataset == "synth") {
    std::tie(tr, te) = synth_split(cfg, spec.input_shape);
  } else {
    const auto root = data_root(cfg.data_root);
    if (!mnist_available(root)) {
      throw CliFailure{2,
                       {{"error", "missing_file"},
                        {"field", "dataset.root"},
                        {"path", root},
                        {"message", "MNIST files not found under '" + root +
                                        "' (see tools/fetch_mnist.sh)"}}};
    }
    tr = load_mnist(root, true);
    te = load_mnist(root, false);
  }
  if (cfg.train.train_limit) tr = take(tr, cfg.train.train_limit);
  if (cfg.train.test_limit) te = take(te, cfg.train.test_limit);
  if (tr.num_classes != spec.num_classes) {
    throw CliFailure{2,
                     {{"error", "config"},
                      {"field", "dataset"},
                      {"message", "dataset has " + std::to_string(tr.num_classes) +
                                      " classes, network expects " +
                                      std::to_string(spec.num_classes)}}};
  }
  return {tr, te};
}

StdlPlan make_plan(const RunConfig& cfg, const NetworkSpec& spec) {
  return cfg.regime == Regime::stdl ? plan_stdl(spec, cfg.budget, cfg.element_width())
                                    : trivial_plan(spec, cfg.element_width());
}

json plan_json(const StdlPlan& plan) {
  json aux = json::array();
  for (const auto& a : plan.auxiliaries) aux.push_back(to_json(a));
  return {{"scope_budget_bytes", plan.scope_budget},
          {"reserve_bytes", plan.reserve},
          {"partition", to_json(plan.partition)},
          {"auxiliaries", aux}};
}

// ---------------------------------------------------------------------------

int cmd_partition(const RunConfig& cfg) {
  const auto out = prepare_output(cfg, "partition");
  json report;
  if (!cfg.footprints.empty()) {
    std::size_t total = 0;
    for (auto f : cfg.footprints) total += f;
    const std::size_t budget = cfg.budget.resolve(total);
    const auto p = greedy_partition(cfg.footprints, budget);
    std::cout << boundary_string(p) << '\n';
    report = {{"footprints", cfg.footprints}, {"partition", to_json(p)}};
  } else {
    const auto spec = load_net(cfg);
    const auto fps = layer_footprints(spec, cfg.element_width());
    const auto plan = plan_stdl(spec, cfg.budget, cfg.element_width());
    std::cout << boundary_string(plan.partition) << '\n';
    for (std::size_t l = 0; l < fps.size(); ++l) {
      std::cout << "  layer " << l + 1 << " " << to_string(spec.layers[l].kind) << " "
                << fps[l] << " bytes\n";
    }
    std::cout << "  scope budget " << plan.scope_budget << " bytes, auxiliary reserve "
              << plan.reserve << " bytes\n";
    for (const auto& a : plan.auxiliaries) {
      std::cout << "  aux" << a.owner << ": depth " << a.depth << ", downsample "
                << a.downsample << ", " << a.footprint << " bytes\n";
    }
    report = plan_json(plan);
    report["layer_footprints_bytes"] = fps;
  }
  write_json(out / "partition.json", report);
  return 0;
}

template <class Real>
int train_impl(const RunConfig& cfg) {
  const auto spec = load_net(cfg);
  const auto [train_set, test_set] = load_data(cfg, spec);
  const auto out = prepare_output(cfg, "train");
  const auto plan = make_plan(cfg, spec);
  SpikingNetwork<Real> net(spec, plan, cfg.seed);
  TrainConfig tc = cfg.train;
  tc.regime = cfg.regime;
  tc.seed = cfg.seed;

  std::ofstream metrics(out / "metrics.csv");
  write_metrics_header(metrics);
  MemoryLedger ledger;
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = train(net, train_set, test_set, tc, ledger, [&](const EpochMetrics& m) {
    write_metrics_row(metrics, m);
    metrics.flush();
    std::printf("epoch %zu loss %.4f test_acc %.4f peak %zu bytes\n", m.epoch, m.train_loss,
                m.test_acc, m.peak_bytes);
    std::fflush(stdout);
  });
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    std::ofstream trace(out / "trace.csv");
    ledger.write_trace(trace);
  }
  {
    std::ofstream curves(out / "peak_curves.csv");
    write_peak_curves(curves, result.peak);
  }
  save_checkpoint(net, (out / "checkpoint.json").string());
  json summary = {{"regime", to_string(cfg.regime)},
                  {"seed", cfg.seed},
                  {"precision", cfg.precision},
                  {"train_samples", train_set.size()},
                  {"test_samples", test_set.size()},
                  {"final_test_acc", result.epochs.back().test_acc},
                  {"peak_bytes", result.peak.peak_bytes},
                  {"peak_layer", result.peak.peak_layer},
                  {"peak_step", result.peak.peak_step},
                  {"param_bytes", result.param_bytes},
                  {"optimizer_bytes", result.optimizer_bytes},
                  {"wall_seconds", secs},
                  {"plan", plan_json(plan)},
                  {"versions", versions()}};
  write_json(out / "summary.json", summary);
  std::printf("final test_acc %.4f, peak %zu bytes at layer %s step %zu\n",
              result.epochs.back().test_acc, result.peak.peak_bytes,
              result.peak.peak_layer.c_str(), result.peak.peak_step);
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  return cfg.precision == "float64" ? train_impl<double>(cfg) : train_impl<float>(cfg);
}

int cmd_gradcheck(const RunConfig& cfg, std::size_t cases) {
  const auto out = prepare_output(cfg, "gradcheck");
  const auto results = verify::run_all(cfg.seed, cases);
  std::ofstream csv(out / "gradcheck.csv");
  csv << "suite,cases,max_error,tolerance,result,detail\n";
  bool ok = true;
  std::printf("%-34s %6s %12s %10s  %s\n", "suite", "cases", "max_error", "tolerance", "result");
  for (const auto& r : results) {
    ok = ok && r.pass;
    std::printf("%-34s %6zu %12.3e %10.1e  %s\n", r.name.c_str(), r.cases, r.max_error,
                r.tolerance, r.pass ? "PASS" : "FAIL");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e,%.1e", r.max_error, r.tolerance);
    csv << r.name << ',' << r.cases << ',' << buf << ',' << (r.pass ? "PASS" : "FAIL") << ",\""
        << r.detail << "\"\n";
  }
  return ok ? 0 : 4;
}

template <class Real>
int trace_impl(const RunConfig& cfg) {
  const auto spec = load_net(cfg);
  const auto out = prepare_output(cfg, "trace");
  const auto plan = make_plan(cfg, spec);
  SpikingNetwork<Real> net(spec, plan, cfg.seed);
  // Ledger sizes do not depend on pixel values; one synthetic batch suffices.
  SynthSpec s;
  s.samples = spec.reference_batch;
  s.classes = spec.num_classes;
  s.shape = spec.input_shape;
  const auto data = synth_blobs(cfg.seed, s);
  const auto b = make_batch<Real>(data, epoch_order(data.size(), 0, 0, false), 0, data.size());
  MemoryLedger ledger;
  run_batch(cfg.regime, net, b, spec.timesteps, &ledger);
  const auto report = ledger.peak_report();
  {
    std::ofstream trace(out / "trace.csv");
    ledger.write_trace(trace);
  }
  std::ofstream curves(out / "peak_curves.csv");
  write_peak_curves(curves, report);
  write_peak_curves(std::cout, report);
  return 0;
}

int cmd_trace(const RunConfig& cfg) {
  return cfg.precision == "float64" ? trace_impl<double>(cfg) : trace_impl<float>(cfg);
}

// Analysis runs in double; float checkpoints load exactly.
std::map<std::string, Tensor<double>> rates_of(const std::string& ckpt, const Dataset& ds,
                                               std::size_t timesteps) {
  require_file(ckpt, "checkpoint");
  auto net = load_checkpoint<double>(ckpt);
  const std::size_t T = timesteps ? timesteps : net.spec().timesteps;
  return collect_rates(net, ds, T);
}

std::pair<Dataset, Dataset> analysis_data(const RunConfig& cfg) {
  require_file(cfg.checkpoint, "checkpoint");
  const auto spec = network_from_json(read_checkpoint_json(cfg.checkpoint).at("network"));
  return load_data(cfg, spec);
}

int cmd_probe(const RunConfig& cfg) {
  const auto [train_set, test_set] = analysis_data(cfg);
  const auto out = prepare_output(cfg, "probe");
  const auto tr = rates_of(cfg.checkpoint, train_set, cfg.timesteps);
  const auto te = rates_of(cfg.checkpoint, test_set, cfg.timesteps);
  ProbeConfig pc;
  pc.seed = cfg.seed;
  std::ofstream csv(out / "probe.csv");
  csv << "layer,features,probe_acc\n";
  for (const auto& [label, X] : tr) {
    const double acc =
        linear_probe(X, train_set.labels, te.at(label), test_set.labels, train_set.num_classes, pc);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", acc);
    csv << label << ',' << X.dim(1) << ',' << buf << '\n';
    std::printf("layer %s: %zu features, probe accuracy %s\n", label.c_str(), X.dim(1), buf);
  }
  return 0;
}

int cmd_cka(const RunConfig& cfg) {
  const auto test_set = analysis_data(cfg).second;
  const auto out = prepare_output(cfg, "cka");
  const auto a = rates_of(cfg.checkpoint, test_set, cfg.timesteps);
  std::ofstream csv(out / "cka.csv");
  csv << "# linear CKA of firing rates on the test split (" << test_set.size() << " samples)\n";
  csv << "layer_a,layer_b,cka\n";
  auto emit = [&](const std::string& la, const std::string& lb, const Tensor<double>& X,
                  const Tensor<double>& Y) {
    char buf[32];
    try {
      std::snprintf(buf, sizeof buf, "%.6f", linear_cka(X, Y));
    } catch (const DegenerateInput&) {
      std::snprintf(buf, sizeof buf, "nan");  // a silent layer
    }
    csv << la << ',' << lb << ',' << buf << '\n';
    std::printf("%s vs %s: %s\n", la.c_str(), lb.c_str(), buf);
  };
  if (!cfg.against.empty()) {
    // Same layer across two trained networks.
    const auto b = rates_of(cfg.against, test_set, cfg.timesteps);
    for (const auto& [label, X] : a) {
      if (b.count(label)) emit(label, label, X, b.at(label));
    }
  } else {
    for (const auto& [la, X] : a) {
      for (const auto& [lb, Y] : a) emit(la, lb, X, Y);
    }
  }
  return 0;
}

void report_failure(const json& record, const std::string& out_dir) {
  std::cerr << record.dump() << '\n';
  if (out_dir.empty()) return;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!ec) std::ofstream(fs::path(out_dir) / "error.json") << record.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spiking network training with spatio-temporal decoupled learning"};
  app.require_subcommand(1);
  Flags f;

  auto* part = app.add_subcommand("partition", "split a network (or raw footprints) under a budget");
  add_common(part, f);
  add_budget(part, f);
  part->add_option("--footprints", f.footprints, "per-layer footprints, e.g. 3,1,2,2,4")
      ->delimiter(',');
  auto* tr = app.add_subcommand("train", "train and write metrics, trace and checkpoint");
  add_common(tr, f);
  add_data(tr, f);
  add_budget(tr, f);
  add_train(tr, f);
  auto* gc = app.add_subcommand("gradcheck", "run the gradient oracle suites");
  add_common(gc, f);
  gc->add_option("--cases", f.cases, "random nets per suite");
  auto* tc = app.add_subcommand("trace", "memory ledger curves for one batch");
  add_common(tc, f);
  add_budget(tc, f);
  auto* pr = app.add_subcommand("probe", "per-layer linear probes of a checkpoint");
  add_common(pr, f);
  add_data(pr, f);
  pr->add_option("--checkpoint", f.checkpoint);
  pr->add_option("-T,--timesteps", f.timesteps);
  auto* ck = app.add_subcommand("cka", "per-layer linear CKA of one or two checkpoints");
  add_common(ck, f);
  add_data(ck, f);
  ck->add_option("--checkpoint", f.checkpoint);
  ck->add_option("--against", f.against, "second checkpoint; same-layer comparison");
  ck->add_option("-T,--timesteps", f.timesteps);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) {
      std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    }
    return code;
  }

  std::string out_dir = f.out.value_or("");
  try {
    const RunConfig cfg = resolve_config(f);
    out_dir = cfg.output_dir;
    if (*part) return cmd_partition(cfg);
    if (*tr) return cmd_train(cfg);
    if (*gc) return cmd_gradcheck(cfg, f.cases);
    if (*tc) return cmd_trace(cfg);
    if (*pr) return cmd_probe(cfg);
    if (*ck) return cmd_cka(cfg);
  } catch (const CliFailure& e) {
    report_failure(e.record, out_dir);
    return e.code;
  } catch (const ConfigError& e) {
    json r{{"error", "config"}, {"message", e.what()}};
    if (!e.field().empty()) r["field"] = e.field();
    if (e.line()) r["line"] = e.line();
    report_failure(r, out_dir);
    return 2;
  } catch (const InfeasibleError& e) {
    report_failure({{"error", "infeasible"}, {"layer", e.layer()}, {"message", e.what()}},
                   out_dir);
    return 3;
  } catch (const BudgetTooSmall& e) {
    report_failure({{"error", "budget_too_small"}, {"message", e.what()}}, out_dir);
    return 3;
  } catch (const NetworkError& e) {
    report_failure({{"error", "network"}, {"message", e.what()}}, out_dir);
    return 2;
  } catch (const IdxError& e) {
    report_failure({{"error", "data"}, {"message", e.what()}}, out_dir);
    return 2;
  } catch (const std::exception& e) {
    report_failure({{"error", "runtime"}, {"message", e.what()}}, out_dir);
    return 1;
  }
  return 1;
}
