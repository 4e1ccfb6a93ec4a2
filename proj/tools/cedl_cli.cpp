// cedl: data generation, training, calibration, attacks, evaluation and
// ablation sweeps over the synthetic benchmark.
//
// Every subcommand reads and writes artifacts under --out:
//   config.json            resolved experiment config
//   data/<cohort>.cedl     id_train, id_val, id_test, ood_val, ood_test
//   weights.json           trained network
//   training_log.csv       per-epoch losses, learning rate and KL weight
//   threshold.json         calibrated cut
//   attacked.cedl          attacked cohort (eval/ablate read it via --attacked)
//   report.{csv,json}      coverage report
//   decisions.csv          per-sample decisions (--dump-decisions)
//   ablation.{csv,json}    one row per ablation value

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cedl/datagen.hpp"
#include "cedl/error.hpp"
#include "cedl/harness.hpp"
#include "cedl/train.hpp"
#include "cedl/weights_io.hpp"

namespace fs = std::filesystem;
using namespace cedl;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

constexpr const char* kCohortNames[] = {"id_train", "id_val", "id_test", "ood_val", "ood_test"};

struct Options {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out = ".";
  std::optional<std::string> metric, method, attack, calibrate_with, adv_cohort, kl, objective;
  std::optional<double> beta, lambda, delta, dropout, eps;
  std::optional<int> views, steps, epochs;
  std::optional<std::size_t> workers;
  bool dump_decisions = false;
  bool timing = false;
  std::string format = "csv";
  // Stored attacked cohort for eval/ablate; attacked afresh when empty.
  std::string attacked_path;
  // ablate
  std::string axis;
  std::vector<std::string> values;
  // report
  std::vector<std::string> inputs;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Defaults, then --config, then flags. Flags are applied as a JSON patch
// so the library's config parser does all validation.
ExperimentConfig resolve_config(const Options& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_path.empty()) {
    try {
      j = nlohmann::json::parse(read_text(o.config_path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(o.config_path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(o.config_path + ": config must be a JSON object");
  }
  auto section = [&](const char* key) -> nlohmann::json& {
    if (!j.contains(key) || !j[key].is_object()) j[key] = nlohmann::json::object();
    return j[key];
  };
  if (o.seed) j["seed"] = *o.seed;
  if (o.metric) j["metric"] = *o.metric;
  if (o.method) j["method"] = *o.method;
  if (o.dropout) j["dropout"] = *o.dropout;
  if (o.workers) j["workers"] = *o.workers;
  if (o.timing) j["record_timing"] = true;
  if (o.calibrate_with) j["calibrate_with"] = *o.calibrate_with;
  if (o.adv_cohort) j["adv_cohort"] = *o.adv_cohort;
  if (o.beta) section("conflict")["beta"] = *o.beta;
  if (o.lambda) section("conflict")["lambda"] = *o.lambda;
  if (o.delta) section("conflict")["delta"] = *o.delta;
  if (o.views) section("transforms")["views"] = *o.views;
  if (o.attack) section("attack")["kind"] = *o.attack;
  if (o.eps) section("attack")["epsilon"] = *o.eps;
  if (o.steps) section("attack")["steps"] = *o.steps;
  if (o.objective) section("attack")["objective"] = *o.objective;
  if (o.kl) section("train")["kl_argument"] = *o.kl;
  if (o.epochs) section("train")["epochs"] = *o.epochs;
  return config_from_json(j.dump());
}

fs::path data_dir(const Options& o) { return fs::path(o.out) / "data"; }

void write_cohorts(const Cohorts& c, const fs::path& dir) {
  fs::create_directories(dir);
  const LabeledDataset* parts[] = {&c.id_train, &c.id_val, &c.id_test, &c.ood_val, &c.ood_test};
  for (std::size_t i = 0; i < 5; ++i) write_dataset(*parts[i], dir / (std::string(kCohortNames[i]) + ".cedl"));
}

// Cohorts from --out/data when present, otherwise regenerated from the config.
Cohorts load_cohorts(const ExperimentConfig& cfg, const Options& o) {
  const auto dir = data_dir(o);
  if (!fs::exists(dir)) return make_cohorts(cfg);
  Cohorts c;
  LabeledDataset* parts[] = {&c.id_train, &c.id_val, &c.id_test, &c.ood_val, &c.ood_test};
  for (std::size_t i = 0; i < 5; ++i) *parts[i] = read_dataset(dir / (std::string(kCohortNames[i]) + ".cedl"));
  return c;
}

EvidentialNet load_net(const Options& o) {
  const auto path = fs::path(o.out) / "weights.json";
  if (!fs::exists(path)) throw IoError(path.string() + " not found; run `cedl train` first");
  return load_weights(path);
}

const LabeledDataset& adv_source(const ExperimentConfig& cfg, const Cohorts& c) {
  return cfg.adv_cohort == AdvCohort::Id ? c.id_test : c.ood_test;
}

LabeledDataset make_attacked(const ExperimentConfig& cfg, const EvidentialNet& net, const Cohorts& c) {
  LabeledDataset out = adv_source(cfg, c);
  out.inputs = attack_inputs(net, out, cfg.attack, cfg.seed, cfg.workers);
  return out;
}

LabeledDataset load_or_attack(const ExperimentConfig& cfg, const EvidentialNet& net, const Cohorts& c,
                              const Options& o) {
  if (!o.attacked_path.empty()) return read_dataset(o.attacked_path);
  return make_attacked(cfg, net, c);
}

ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::CSV;
  if (s == "json") return ReportFormat::JSON;
  throw ConfigError("unknown report format '" + s + "' (csv | json)");
}

void save_config(const ExperimentConfig& cfg, const Options& o) {
  fs::create_directories(o.out);
  write_text(fs::path(o.out) / "config.json", config_to_json(cfg));
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const Options& o) {
  const auto cfg = resolve_config(o);
  const auto c = make_cohorts(cfg);
  write_cohorts(c, data_dir(o));
  save_config(cfg, o);
  std::printf("wrote %zu/%zu/%zu ID and %zu/%zu OOD samples to %s\n", c.id_train.size(), c.id_val.size(),
              c.id_test.size(), c.ood_val.size(), c.ood_test.size(), data_dir(o).string().c_str());
  return 0;
}

int cmd_train(const Options& o) {
  const auto cfg = resolve_config(o);
  const auto c = load_cohorts(cfg, o);
  TrainingLog log;
  const auto net = train_model(cfg, c, &log);
  save_config(cfg, o);
  save_weights(net, fs::path(o.out) / "weights.json");
  write_text(fs::path(o.out) / "training_log.csv", log.to_csv());
  std::printf("trained %zu epochs; id_test accuracy %.4f\n", log.epochs.size(), accuracy(net, c.id_test));
  return 0;
}

int cmd_calibrate(const Options& o) {
  const auto cfg = resolve_config(o);
  const auto c = load_cohorts(cfg, o);
  const auto net = load_net(o);
  const auto thr = calibrate(cfg, net, c);
  write_text(fs::path(o.out) / "threshold.json", threshold_to_json(thr));
  std::printf("%s %s cut %.6g (tpr %.4f, fpr %.4f)\n", to_string(cfg.method).c_str(),
              std::string(to_string(cfg.metric)).c_str(), thr.cut, thr.tpr, thr.fpr);
  return 0;
}

int cmd_attack(const Options& o) {
  const auto cfg = resolve_config(o);
  const auto c = load_cohorts(cfg, o);
  const auto net = load_net(o);
  const auto attacked = make_attacked(cfg, net, c);
  const auto path = fs::path(o.out) / "attacked.cedl";
  write_dataset(attacked, path);
  std::printf("attacked %zu %s inputs with %s eps %.4g -> %s\n", attacked.size(),
              cfg.adv_cohort == AdvCohort::Id ? "ID" : "OOD", std::string(to_string(cfg.attack.kind)).c_str(),
              cfg.attack.epsilon, path.string().c_str());
  return 0;
}

int cmd_eval(const Options& o) {
  const auto cfg = resolve_config(o);
  const auto c = load_cohorts(cfg, o);
  const auto net = load_net(o);
  const auto attacked = load_or_attack(cfg, net, c, o);
  std::vector<DecisionRecord> decisions;
  const auto r =
      evaluate(cfg, {&net, &c, &attacked.inputs, &attacked.labels}, o.dump_decisions ? &decisions : nullptr);
  const auto format = parse_format(o.format);
  const auto path = fs::path(o.out) / (format == ReportFormat::CSV ? "report.csv" : "report.json");
  emit_report({r}, format, path);
  if (o.dump_decisions) write_text(fs::path(o.out) / "decisions.csv", decisions_to_csv(decisions));
  std::cout << reports_to_csv({r});
  return 0;
}

int cmd_ablate(const Options& o) {
  if (o.values.empty()) throw ConfigError("ablate: --values must name at least one value");
  const auto cfg = resolve_config(o);
  const auto axis = parse_axis(o.axis);
  const auto c = load_cohorts(cfg, o);
  const auto weights = fs::path(o.out) / "weights.json";
  const auto net = fs::exists(weights) ? load_weights(weights) : train_model(cfg, c);
  const auto attacked = load_or_attack(cfg, net, c, o);
  const auto rows = ablate(axis, o.values, cfg, {&net, &c, &attacked.inputs, &attacked.labels});
  const auto format = parse_format(o.format);
  emit_report(rows, format, fs::path(o.out) / (format == ReportFormat::CSV ? "ablation.csv" : "ablation.json"));
  std::cout << reports_to_csv(rows);
  return 0;
}

int cmd_report(const Options& o) {
  if (o.inputs.empty()) throw ConfigError("report: --in must name at least one report JSON file");
  std::vector<CoverageReport> all;
  for (const auto& in : o.inputs) {
    for (auto& r : reports_from_json(read_text(in))) all.push_back(std::move(r));
  }
  const auto format = parse_format(o.format);
  std::cout << (format == ReportFormat::CSV ? reports_to_csv(all) : reports_to_json(all));
  return 0;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Experiment seed");
  sub->add_option("--config", o.config_path, "Experiment config JSON")->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "Artifact directory")->capture_default_str();
  sub->add_option("--metric", o.metric, "diff-entropy | total-evidence | mutual-info");
  sub->add_option("--method", o.method, "edl | edlpp-meta | edlpp-mc | cedl-meta | cedl-mc");
  sub->add_option("--beta", o.beta, "Inter-class sharpness");
  sub->add_option("--lambda", o.lambda, "Asymmetry penalty in [0, 1]");
  sub->add_option("--delta", o.delta, "Decay sensitivity");
  sub->add_option("--T", o.views, "Views per input");
  sub->add_option("--dropout", o.dropout, "Dropout rate of the network (MC views)");
  sub->add_option("--attack", o.attack, "l2pgd | fgsm | saltpepper");
  sub->add_option("--eps", o.eps, "Attack budget");
  sub->add_option("--steps", o.steps, "L2PGD iterations");
  sub->add_option("--objective", o.objective, "maximize-confidence | maximize-loss");
  sub->add_option("--calibrate-with", o.calibrate_with, "method | edl");
  sub->add_option("--adv-cohort", o.adv_cohort, "ood | id");
  sub->add_option("--kl", o.kl, "KL argument: misleading | raw");
  sub->add_option("--epochs", o.epochs, "Training epochs");
  sub->add_option("--workers", o.workers, "Evaluation threads");
  sub->add_flag("--dump-decisions", o.dump_decisions, "Write per-sample decisions.csv");
  sub->add_flag("--timing", o.timing, "Record mean inference wall-time");
  sub->add_option("--format", o.format, "csv | json")->capture_default_str();
  sub->add_option("--attacked", o.attacked_path, "Attacked cohort written by `cedl attack`");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conflict-aware evidential uncertainty experiments"};
  app.require_subcommand(1);
  Options o;

  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Entry entries[] = {
      {"gen-data", "Generate and store the ID/OOD cohorts", cmd_gen_data},
      {"train", "Train the evidential network", cmd_train},
      {"calibrate", "Fit the abstention threshold", cmd_calibrate},
      {"attack", "Attack the configured cohort and store it", cmd_attack},
      {"eval", "Evaluate coverage and write a report", cmd_eval},
      {"ablate", "Sweep one axis over a shared network", cmd_ablate},
      {"report", "Merge report JSON files", cmd_report},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, o);
    if (std::string(e.name) == "ablate") {
      sub->add_option("--axis", o.axis, "beta | lambda | delta | T | dropout | transform")->required();
      sub->add_option("--values", o.values, "Comma-separated values")->required()->delimiter(',');
    }
    if (std::string(e.name) == "report") {
      sub->add_option("--in", o.inputs, "Report JSON files")->required();
    }
    subs.emplace_back(sub, &e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    for (const auto& [sub, e] : subs) {
      if (sub->parsed()) return e->run(o);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
