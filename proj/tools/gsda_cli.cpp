// gsda: graph-spectral point cloud processing, spectral-domain attack and
// low-frequency defense, exposed as subcommands with seeded, machine-readable
// outputs.

#include "gsda/attack.hpp"
#include "gsda/defense.hpp"
#include "gsda/graph.hpp"
#include "gsda/ingestion.hpp"
#include "gsda/io.hpp"
#include "gsda/parallel.hpp"
#include "gsda/rng.hpp"
#include "gsda/spectral.hpp"
#include "gsda/victim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gsda;

namespace {

constexpr const char* kVersion = "1.0.0";

std::vector<std::string> g_argv;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One manifest per output directory: command, configuration, seed and the
/// produced artifacts (relative to the directory).
void write_manifest(const fs::path& dir, const std::string& command, const json& config, std::uint64_t seed,
                    std::vector<fs::path> artifacts) {
  json m;
  m["tool"] = "gsda";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = seed;
  m["config"] = config;
  m["argv"] = g_argv;
  json paths = json::array();
  std::sort(artifacts.begin(), artifacts.end());
  for (const auto& a : artifacts) paths.push_back(a.lexically_relative(dir).generic_string());
  m["artifacts"] = paths;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

fs::path output_dir_of(const fs::path& file) {
  const fs::path dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
  fs::create_directories(dir);
  return dir;
}

std::string sample_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return buf;
}

// ---------------------------------------------------------------------------

struct GenDataOpts {
  fs::path out;
  int per_class = 100;
  int holdout_per_class = 30;
  int points = 256;
  double jitter = 0.01;
  std::string mesh;
};

void run_gen_data(const GenDataOpts& o, std::uint64_t seed) {
  fs::create_directories(o.out);
  json cfg = {{"per_class", o.per_class}, {"holdout_per_class", o.holdout_per_class}, {"points", o.points},
              {"jitter", o.jitter}};
  std::vector<fs::path> artifacts;
  if (!o.mesh.empty()) {
    const auto mesh = load_off(o.mesh);
    const auto cloud = sample_surface(mesh, o.points, SeedTree(seed).child("mesh").seed());
    save_xyz(o.out / "cloud.xyz", cloud.points);
    cfg["mesh"] = fs::path(o.mesh).filename().string();
    artifacts.push_back(o.out / "cloud.xyz");
  } else {
    const SeedTree root(seed);
    save_dataset(o.out / "train", gen_synthetic(o.per_class, o.points, root.child("train").seed(), o.jitter));
    save_dataset(o.out / "holdout", gen_synthetic(o.holdout_per_class, o.points, root.child("holdout").seed(), o.jitter));
    artifacts = {o.out / "train" / "index.csv", o.out / "holdout" / "index.csv"};
  }
  write_manifest(o.out, "gen-data", cfg, seed, artifacts);
}

// ---------------------------------------------------------------------------

struct TrainOpts {
  fs::path data;
  fs::path out;
  int hidden = 64;
  int epochs = 30;
  int batch = 16;
  double lr = 0.01;
  double momentum = 0.9;
  bool lowpass_augment = false;
  double band = kDefaultLowpassFraction;
  int k = 10;
};

void run_train(const TrainOpts& o, std::uint64_t seed, int jobs) {
  const Dataset train_set = load_dataset(o.data / "train");
  Dataset holdout;
  if (fs::exists(o.data / "holdout" / "index.csv")) holdout = load_dataset(o.data / "holdout");

  TrainConfig cfg;
  cfg.hidden = o.hidden;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.lr = o.lr;
  cfg.momentum = o.momentum;
  cfg.seed = SeedTree(seed).child("train").seed();

  ToyClassifier model;
  TrainReport report;
  if (o.lowpass_augment) {
    auto defended = train_with_lowpass_augmentation(train_set, holdout, cfg, o.k, o.band, jobs);
    model = std::move(defended.model);
    report = std::move(defended.report);
  } else {
    model = train(train_set, holdout, cfg, &report);
  }

  fs::create_directories(o.out);
  save_model(o.out / "model.json", model);
  json r = {{"train_accuracy", report.train_accuracy},
            {"holdout_accuracy", report.holdout_accuracy},
            {"epoch_loss", report.epoch_loss},
            {"lowpass_augment", o.lowpass_augment}};
  write_text(o.out / "report.json", r.dump(2) + "\n");
  json c = {{"hidden", o.hidden},   {"epochs", o.epochs}, {"batch", o.batch},
            {"lr", o.lr},           {"momentum", o.momentum}, {"lowpass_augment", o.lowpass_augment},
            {"band", o.band},       {"k", o.k}};
  write_manifest(o.out, "train", c, seed, {o.out / "model.json", o.out / "report.json"});
  std::cout << r.dump() << "\n";
}

// ---------------------------------------------------------------------------

int effective_k(int requested, Eigen::Index n) {
  return static_cast<int>(std::min<Eigen::Index>(requested, n - 1));
}

struct SpectrumOpts {
  fs::path in;
  fs::path out;
  int k = 10;
};

void run_spectrum(const SpectrumOpts& o, std::uint64_t seed) {
  const Points p = load_xyz(o.in);
  const int k = effective_k(o.k, p.rows());
  const auto basis = graph_basis(p, k);
  std::ostringstream csv;
  write_spectrum_csv(csv, gft(p, basis));
  write_text(o.out, csv.str());
  write_manifest(output_dir_of(o.out), "spectrum", {{"k", k}, {"requested_k", o.k}}, seed, {o.out});
}

// ---------------------------------------------------------------------------

struct FilterOpts {
  fs::path in;
  fs::path out;
  int k = 10;
  std::string keep = "low";
  std::vector<std::string> ranges;
  int low_end = 0;
  int mid_end = 0;
};

void run_filter(const FilterOpts& o, std::uint64_t seed) {
  const Points p = load_xyz(o.in);
  const auto n = p.rows();
  const int k = effective_k(o.k, n);
  std::vector<IndexRange> keep;
  if (o.keep == "custom") {
    if (o.ranges.empty()) throw UsageError("--keep custom requires at least one --range a:b");
    const std::regex re(R"((\d+):(\d+))");
    for (const auto& r : o.ranges) {
      std::smatch m;
      if (!std::regex_match(r, m, re)) throw UsageError("malformed --range '" + r + "', expected a:b");
      keep.emplace_back(std::stol(m[1]), std::stol(m[2]));
    }
  } else {
    std::vector<std::string> bands;
    std::stringstream ss(o.keep);
    for (std::string band; std::getline(ss, band, ',');) {
      if (band != "low" && band != "mid" && band != "high") {
        throw UsageError("--keep expects low|mid|high (comma separated) or custom");
      }
      bands.push_back(band);
    }
    const BandSplit split =
        (o.low_end > 0 && o.mid_end > 0) ? make_band_split(n, o.low_end, o.mid_end) : default_band_split(n);
    for (const auto& band : bands) {
      if (band == "low") keep.emplace_back(0, split.low_end);
      else if (band == "mid") keep.emplace_back(split.low_end, split.mid_end);
      else keep.emplace_back(split.mid_end, n);
    }
  }
  const auto basis = graph_basis(p, k);
  const auto response = ideal_band_response(n, keep);
  const Points filtered = igft(apply_response(gft(p, basis), response));
  const fs::path dir = output_dir_of(o.out);
  save_xyz(o.out, filtered);
  json ranges = json::array();
  for (const auto& [a, b] : keep) ranges.push_back({a, b});
  write_manifest(dir, "filter", {{"k", k}, {"keep", o.keep}, {"ranges", ranges}}, seed, {o.out});
}

// ---------------------------------------------------------------------------

struct AttackOpts {
  fs::path model;
  fs::path in;
  int label = -1;
  fs::path data;
  int limit = 0;
  bool include_misclassified = false;
  fs::path out;
  std::string mode = "untargeted";
  double eps = 1.5;
  int iters = 500;
  int k = 10;
  int poly_len = 5;
  double lr = 0.01;
  double beta1 = 10.0;
  double beta2 = 1.0;
  double chamfer_weight = 5.0;
  double hausdorff_weight = 0.5;
  double lfc_fraction = 400.0 / 1024.0;
  int binary_search_steps = 10;
  bool trace = false;
};

AttackConfig attack_config_from(const AttackOpts& o, std::uint64_t seed) {
  AttackConfig cfg;
  try {
    cfg.mode = parse_attack_mode(o.mode, &cfg.target);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  cfg.epsilon = o.eps;
  cfg.iters = o.iters;
  cfg.k = o.k;
  cfg.poly_len = o.poly_len;
  cfg.lr = o.lr;
  cfg.beta1 = o.beta1;
  cfg.beta2 = o.beta2;
  cfg.chamfer_weight = o.chamfer_weight;
  cfg.hausdorff_weight = o.hausdorff_weight;
  cfg.lfc_fraction = o.lfc_fraction;
  cfg.binary_search_steps = o.binary_search_steps;
  cfg.seed = SeedTree(seed).child("attack").seed();
  return cfg;
}

void run_attack_cmd(const AttackOpts& o, std::uint64_t seed, int jobs) {
  const ToyClassifier model = load_model(o.model);
  AttackConfig cfg = attack_config_from(o, seed);

  Dataset inputs;
  if (!o.in.empty()) {
    if (o.label < 0) throw UsageError("--in requires --label");
    try {
      cfg.validate(o.label, model.classes());
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    inputs.push_back({load_xyz(o.in), o.label});
  } else if (!o.data.empty()) {
    for (auto& s : load_dataset(o.data)) {
      if (!o.include_misclassified && predict(model, s.points) != s.label) continue;
      if (cfg.mode == AttackMode::targeted && s.label == cfg.target) continue;
      inputs.push_back(std::move(s));
      if (o.limit > 0 && static_cast<int>(inputs.size()) == o.limit) break;
    }
  } else {
    throw UsageError("attack needs --in or --data");
  }

  std::vector<AttackResult> results(inputs.size());
  parallel_for(inputs.size(), jobs, [&](std::size_t i) {
    AttackConfig c = cfg;
    c.seed = SeedTree(cfg.seed).child(i).seed();
    c.record_trace = o.trace;
    results[i] = c.binary_search_steps > 1 ? binary_search_beta(inputs[i].points, inputs[i].label, c, model)
                                           : run_attack(inputs[i].points, inputs[i].label, c, model);
  });

  fs::create_directories(o.out);
  std::vector<fs::path> artifacts;
  std::ostringstream index;
  index << "id,label,target,success,predicted," << kDistortionCsvHeader << "\n";
  int successes = 0;
  json summary_reports = json::array();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string id = sample_id(i);
    const auto& r = results[i];
    save_xyz(o.out / (id + "_clean.xyz"), inputs[i].points);
    save_xyz(o.out / (id + "_adv.xyz"), r.adversarial);
    json rec = to_json(r);
    rec["id"] = id;
    rec["label"] = inputs[i].label;
    rec["config"] = to_json(cfg);
    write_text(o.out / (id + ".json"), rec.dump(2) + "\n");
    artifacts.insert(artifacts.end(), {o.out / (id + "_clean.xyz"), o.out / (id + "_adv.xyz"), o.out / (id + ".json")});
    if (o.trace) {
      std::ostringstream t;
      write_trace_csv(t, r.trace);
      write_text(o.out / (id + "_trace.csv"), t.str());
      artifacts.push_back(o.out / (id + "_trace.csv"));
    }
    successes += r.success;
    index << id << ',' << inputs[i].label << ',' << (cfg.mode == AttackMode::targeted ? cfg.target : -1) << ','
          << int(r.success) << ',' << r.predicted << ',' << distortion_csv_row(r.report) << "\n";
  }
  write_text(o.out / "attacks.csv", index.str());
  const double rate = inputs.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(inputs.size());
  json summary = {{"samples", inputs.size()}, {"successes", successes}, {"success_rate", rate}, {"config", to_json(cfg)}};
  write_text(o.out / "summary.json", summary.dump(2) + "\n");
  artifacts.insert(artifacts.end(), {o.out / "attacks.csv", o.out / "summary.json"});
  write_manifest(o.out, "attack", to_json(cfg), seed, artifacts);
  std::cout << summary.dump() << "\n";
}

// ---------------------------------------------------------------------------

std::vector<TransferSample> load_attack_dir(const fs::path& dir) {
  std::ifstream index(dir / "attacks.csv");
  if (!index) throw std::runtime_error("cannot open " + (dir / "attacks.csv").string());
  std::string line;
  std::getline(index, line);
  std::vector<TransferSample> out;
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, label, target, success;
    std::getline(ss, id, ',');
    std::getline(ss, label, ',');
    std::getline(ss, target, ',');
    std::getline(ss, success, ',');
    TransferSample s;
    s.clean = load_xyz(dir / (id + "_clean.xyz"));
    s.adversarial = load_xyz(dir / (id + "_adv.xyz"));
    s.label = std::stoi(label);
    if (std::stoi(target) >= 0) s.target = std::stoi(target);
    s.success = success == "1";
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("malformed number '" + item + "' in list");
    }
  }
  return out;
}

struct DefendOpts {
  std::string kind = "srs";
  fs::path attacks;
  fs::path model;
  fs::path defended_model;
  std::string params;
  int sor_k = 2;
  int graph_k = 10;
  fs::path out;
  bool adaptive = false;
  AttackOpts adaptive_attack;
};

void run_defend(const DefendOpts& o, std::uint64_t seed, int jobs) {
  const ToyClassifier model = load_model(o.model);
  std::vector<TransferSample> samples = load_attack_dir(o.attacks);

  DefenseConfig base;
  base.seed = SeedTree(seed).child("defense").seed();
  base.k = o.sor_k;
  base.graph_k = o.graph_k;
  std::vector<double> params;
  if (o.kind == "lowpass") {
    base.kind = DefenseKind::lowpass_retrain;
    params = o.params.empty() ? std::vector<double>{kDefaultLowpassFraction} : parse_list(o.params);
  } else if (o.kind == "srs") {
    base.kind = DefenseKind::srs;
    params = o.params.empty() ? std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5} : parse_list(o.params);
  } else if (o.kind == "sor") {
    base.kind = DefenseKind::sor;
    params = o.params.empty() ? std::vector<double>{1.0} : parse_list(o.params);
  } else if (o.kind == "gaussian") {
    base.kind = DefenseKind::gaussian;
    params = o.params.empty() ? std::vector<double>{0.01, 0.02, 0.03, 0.04} : parse_list(o.params);
  } else {
    throw UsageError("--kind must be lowpass, srs, sor or gaussian");
  }

  ToyClassifier defended;
  if (base.kind == DefenseKind::lowpass_retrain) {
    if (o.defended_model.empty()) throw UsageError("--kind lowpass requires --defended-model (train --lowpass-augment)");
    defended = load_model(o.defended_model);
    if (o.adaptive) {
      // Re-attack the retrained model directly, then score with low-pass inference.
      AttackConfig cfg = attack_config_from(o.adaptive_attack, seed);
      parallel_for(samples.size(), jobs, [&](std::size_t i) {
        auto& s = samples[i];
        if (predict(defended, s.clean) != s.label) {
          s.adversarial = s.clean;
          s.success = true;
          return;
        }
        AttackConfig c = cfg;
        c.seed = SeedTree(cfg.seed).child(i).seed();
        c.record_trace = false;
        const auto r = c.binary_search_steps > 1 ? binary_search_beta(s.clean, s.label, c, defended)
                                                 : run_attack(s.clean, s.label, c, defended);
        s.adversarial = r.adversarial;
        s.success = r.success;
      });
    }
  }

  std::ostringstream csv;
  csv << "defense,param,success_rate\n";
  char buf[128];
  const DefenseConfig none;
  const double raw = evaluate_under_defense(samples, make_predictor(none, o.adaptive ? defended : model));
  std::snprintf(buf, sizeof buf, "none,0,%.17g\n", raw);
  csv << buf;
  json rows = json::array();
  for (double p : params) {
    DefenseConfig cfg = base;
    if (cfg.kind == DefenseKind::sor) cfg.sigma_mult = p;
    else cfg.fraction = p;
    const ToyClassifier& victim = cfg.kind == DefenseKind::lowpass_retrain ? defended : model;
    const auto predictor = make_predictor(cfg, victim);
    std::vector<int> preds(samples.size(), -1);
    parallel_for(samples.size(), jobs, [&](std::size_t i) {
      if (samples[i].success) preds[i] = predictor(samples[i], i);
    });
    const double rate = evaluate_under_defense(
        samples, [&](const TransferSample&, std::size_t i) { return preds[i]; });
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", cfg.label().c_str(), p, rate);
    csv << buf;
    rows.push_back({{"defense", cfg.label()}, {"param", p}, {"success_rate", rate}});
  }
  write_text(o.out, csv.str());
  write_manifest(output_dir_of(o.out), "defend",
                 {{"kind", o.kind}, {"params", params}, {"sor_k", o.sor_k}, {"graph_k", o.graph_k}, {"adaptive", o.adaptive}},
                 seed, {o.out});
  std::cout << json({{"baseline", raw}, {"rows", rows}}).dump() << "\n";
}

// ---------------------------------------------------------------------------

struct EvalOpts {
  fs::path dir;
  fs::path out;
  int k = 10;
};

void run_eval(const EvalOpts& o, std::uint64_t seed, int jobs) {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(o.dir)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = "_clean.xyz";
    if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      const std::string id = name.substr(0, name.size() - suffix.size());
      if (fs::exists(o.dir / (id + "_adv.xyz"))) ids.push_back(id);
    }
  }
  std::sort(ids.begin(), ids.end());
  std::vector<DistortionReport> reports(ids.size());
  parallel_for(ids.size(), jobs, [&](std::size_t i) {
    const Points clean = load_xyz(o.dir / (ids[i] + "_clean.xyz"));
    const Points adv = load_xyz(o.dir / (ids[i] + "_adv.xyz"));
    const int k = effective_k(o.k, clean.rows());
    reports[i] = distortion_report(adv, clean, graph_basis(clean, k), k);
  });
  std::ostringstream csv;
  csv << "id," << kDistortionCsvHeader << "\n";
  for (std::size_t i = 0; i < ids.size(); ++i) csv << ids[i] << ',' << distortion_csv_row(reports[i]) << "\n";
  write_text(o.out, csv.str());
  write_manifest(output_dir_of(o.out), "eval", {{"k", o.k}, {"pairs", ids.size()}}, seed, {o.out});
}

void add_attack_options(CLI::App* cmd, AttackOpts& o) {
  cmd->add_option("--mode", o.mode, "untargeted | targeted:<label>");
  cmd->add_option("--eps", o.eps, "Spectral budget epsilon")->check(CLI::PositiveNumber);
  cmd->add_option("--iters", o.iters, "Iterations per run")->check(CLI::NonNegativeNumber);
  cmd->add_option("--k", o.k, "K-NN graph neighbours")->check(CLI::PositiveNumber);
  cmd->add_option("--poly-len", o.poly_len, "Polynomial filter length L")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", o.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--beta1", o.beta1, "Initial regularizer weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--beta2", o.beta2, "Low-frequency constraint weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--chamfer-weight", o.chamfer_weight)->check(CLI::NonNegativeNumber);
  cmd->add_option("--hausdorff-weight", o.hausdorff_weight)->check(CLI::NonNegativeNumber);
  cmd->add_option("--lfc-fraction", o.lfc_fraction, "Low band bound as a fraction of n")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--binary-search-steps", o.binary_search_steps)->check(CLI::PositiveNumber);
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json({{"error", kind}, {"message", message}}).dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  g_argv.assign(argv + 1, argv + argc);
  CLI::App app{"Graph-spectral point cloud attack and defense toolkit"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Key-value config file (TOML/INI); flags override it");
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  int jobs = 1;
  app.add_option("--seed", seed, "Master 64-bit seed")->capture_default_str();
  app.add_option("--jobs", jobs, "Worker threads for batch work")->check(CLI::PositiveNumber);

  GenDataOpts gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate the synthetic dataset or sample an OFF mesh");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--per-class", gen.per_class)->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--holdout-per-class", gen.holdout_per_class)->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--points", gen.points)->check(CLI::Range(2, 1 << 20));
  gen_cmd->add_option("--jitter", gen.jitter)->check(CLI::Range(0.0, 0.01));
  gen_cmd->add_option("--mesh", gen.mesh, "OFF mesh to sample instead of the synthetic set")->check(CLI::ExistingFile);

  TrainOpts tr;
  auto* train_cmd = app.add_subcommand("train", "Train the victim classifier");
  train_cmd->add_option("--data", tr.data, "Dataset root (train/ and optional holdout/)")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--out", tr.out, "Output directory")->required();
  train_cmd->add_option("--hidden", tr.hidden)->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", tr.epochs)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--batch", tr.batch)->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", tr.lr)->check(CLI::PositiveNumber);
  train_cmd->add_option("--momentum", tr.momentum)->check(CLI::Range(0.0, 1.0));
  train_cmd->add_flag("--lowpass-augment", tr.lowpass_augment, "Train on originals plus low-pass reconstructions");
  train_cmd->add_option("--band", tr.band, "Low band fraction for augmentation")->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--k", tr.k)->check(CLI::PositiveNumber);

  SpectrumOpts sp;
  auto* spec_cmd = app.add_subcommand("spectrum", "Per-frequency GFT energy of a cloud");
  spec_cmd->add_option("--in", sp.in)->required()->check(CLI::ExistingFile);
  spec_cmd->add_option("--out", sp.out)->required();
  spec_cmd->add_option("--k", sp.k)->check(CLI::PositiveNumber);

  FilterOpts fo;
  auto* filter_cmd = app.add_subcommand("filter", "Reconstruct a cloud from selected frequency bands");
  filter_cmd->add_option("--in", fo.in)->required()->check(CLI::ExistingFile);
  filter_cmd->add_option("--out", fo.out)->required();
  filter_cmd->add_option("--k", fo.k)->check(CLI::PositiveNumber);
  filter_cmd->add_option("--keep", fo.keep, "low|mid|high (comma separated) or custom");
  filter_cmd->add_option("--range", fo.ranges, "Custom half-open frequency index range a:b (repeatable)");
  filter_cmd->add_option("--low-end", fo.low_end, "Override the low band end index")->check(CLI::NonNegativeNumber);
  filter_cmd->add_option("--mid-end", fo.mid_end, "Override the mid band end index")->check(CLI::NonNegativeNumber);

  AttackOpts at;
  auto* attack_cmd = app.add_subcommand("attack", "Run the spectral-domain attack");
  attack_cmd->add_option("--model", at.model)->required()->check(CLI::ExistingFile);
  attack_cmd->add_option("--in", at.in, "Single clean cloud")->check(CLI::ExistingFile);
  attack_cmd->add_option("--label", at.label, "True label of --in");
  attack_cmd->add_option("--data", at.data, "Dataset directory to attack")->check(CLI::ExistingDirectory);
  attack_cmd->add_option("--limit", at.limit, "Attack at most this many samples")->check(CLI::NonNegativeNumber);
  attack_cmd->add_flag("--include-misclassified", at.include_misclassified);
  attack_cmd->add_option("--out", at.out)->required();
  attack_cmd->add_flag("--trace", at.trace, "Write per-iteration loss / E_delta CSV");
  add_attack_options(attack_cmd, at);

  DefendOpts df;
  auto* defend_cmd = app.add_subcommand("defend", "Evaluate attack transfer under a defense");
  defend_cmd->add_option("--kind", df.kind, "lowpass|srs|sor|gaussian")->required();
  defend_cmd->add_option("--attacks", df.attacks, "Attack output directory")->required()->check(CLI::ExistingDirectory);
  defend_cmd->add_option("--model", df.model, "Undefended model")->required()->check(CLI::ExistingFile);
  defend_cmd->add_option("--defended-model", df.defended_model, "Low-pass retrained model")->check(CLI::ExistingFile);
  defend_cmd->add_option("--params", df.params, "Comma separated parameter sweep");
  defend_cmd->add_option("--sor-k", df.sor_k)->check(CLI::PositiveNumber);
  defend_cmd->add_option("--graph-k", df.graph_k)->check(CLI::PositiveNumber);
  defend_cmd->add_option("--out", df.out, "CSV output")->required();
  defend_cmd->add_flag("--adaptive", df.adaptive, "Re-attack the defended model instead of transferring");
  add_attack_options(defend_cmd, df.adaptive_attack);

  EvalOpts ev;
  auto* eval_cmd = app.add_subcommand("eval", "Distortion table over (clean, adversarial) pairs");
  eval_cmd->add_option("--dir", ev.dir)->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--out", ev.out)->required();
  eval_cmd->add_option("--k", ev.k)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 1;
  }

  try {
    if (*gen_cmd) run_gen_data(gen, seed);
    else if (*train_cmd) run_train(tr, seed, jobs);
    else if (*spec_cmd) run_spectrum(sp, seed);
    else if (*filter_cmd) run_filter(fo, seed);
    else if (*attack_cmd) run_attack_cmd(at, seed, jobs);
    else if (*defend_cmd) run_defend(df, seed, jobs);
    else if (*eval_cmd) run_eval(ev, seed, jobs);
  } catch (const UsageError& e) {
    print_error("usage", e.what());
    return 1;
  } catch (const NumericalError& e) {
    print_error("numerical", e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return 2;
  }
  return 0;
}
