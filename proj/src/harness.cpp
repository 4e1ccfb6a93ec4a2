#include "cedl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cedl/error.hpp"

namespace cedl {
namespace {

// Per-purpose seed streams.
enum Stream : std::uint64_t {
  kStreamIdVal = 1,
  kStreamOodVal = 2,
  kStreamIdTest = 3,
  kStreamOodTest = 4,
  kStreamAttack = 6,
  kStreamIdData = 10,
  kStreamIdSplit = 11,
  kStreamOodData = 12,
  kStreamNetInit = 20,
  kStreamTrain = 21,
};

}  // namespace

std::string to_string(const MethodKind& m) {
  switch (m.method) {
    case Method::EDL:
      return "edl";
    case Method::EDLpp:
      return m.views == ViewMode::Metamorphic ? "edlpp-meta" : "edlpp-mc";
    case Method::CEDL:
      return m.views == ViewMode::Metamorphic ? "cedl-meta" : "cedl-mc";
  }
  return "unknown";
}

MethodKind parse_method(std::string_view name) {
  if (name == "edl") return {Method::EDL, ViewMode::Metamorphic};
  if (name == "edlpp-meta") return {Method::EDLpp, ViewMode::Metamorphic};
  if (name == "edlpp-mc") return {Method::EDLpp, ViewMode::MCDropout};
  if (name == "cedl-meta") return {Method::CEDL, ViewMode::Metamorphic};
  if (name == "cedl-mc") return {Method::CEDL, ViewMode::MCDropout};
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

Prediction predict(const MethodKind& m, const EvidentialNet& net, const GridInput& x, const TransformSpec& spec,
                   const ConflictParams& params, Rng& rng) {
  if (m.method == Method::EDL) return {forward(net, x.pixels), std::nullopt};
  TransformSpec s = spec;
  s.mode = m.views;
  const EvidenceSet es = make_views(x, s, net, rng);
  if (m.method == Method::EDLpp) return {DirichletParams(aggregate(es)), std::nullopt};
  AdjustedPrediction adj = adjust(es, params);
  return {DirichletParams(std::move(adj.alpha_tilde)), adj.conflict};
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void ExperimentConfig::validate() const {
  if (data.classes < 2) throw ConfigError("config: need at least 2 classes");
  if (data.n_per_class < 3) throw ConfigError("config: n_per_class must be >= 3");
  if (is_ood(data.id_family)) throw ConfigError("config: id_family must be an ID family");
  if (!is_ood(data.ood_family)) throw ConfigError("config: ood_family must be an OOD family");
  if (hidden.empty()) throw ConfigError("config: need at least one hidden layer");
  try {
    train.validate();
    conflict.validate();
    transforms.validate();
    attack.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("config: dropout must lie in [0, 1)");
  if (workers == 0) throw ConfigError("config: workers must be >= 1");
}

namespace {


std::string_view objective_name(AttackObjective o) {
  return o == AttackObjective::MaximizeLoss ? "maximize-loss" : "maximize-confidence";
}

AttackObjective parse_objective(std::string_view s) {
  if (s == "maximize-loss") return AttackObjective::MaximizeLoss;
  if (s == "maximize-confidence") return AttackObjective::MaximizeConfidence;
  throw ConfigError("unknown attack objective '" + std::string(s) + "'");
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("data")) {
      const auto& d = j["data"];
      cfg.data.id_family = parse_family(d.value("id_family", std::string(to_string(cfg.data.id_family))));
      cfg.data.ood_family = parse_family(d.value("ood_family", std::string(to_string(cfg.data.ood_family))));
      cfg.data.classes = d.value("classes", cfg.data.classes);
      cfg.data.size = d.value("size", cfg.data.size);
      cfg.data.n_per_class = d.value("n_per_class", cfg.data.n_per_class);
      cfg.data.ood_per_split = d.value("ood_per_split", cfg.data.ood_per_split);
      if (d.contains("fractions")) cfg.data.fractions = d["fractions"].get<std::array<double, 3>>();
      cfg.data.angle_jitter_deg = d.value("angle_jitter_deg", cfg.data.angle_jitter_deg);
      cfg.data.offset_jitter_px = d.value("offset_jitter_px", cfg.data.offset_jitter_px);
      cfg.data.noise_sigma = d.value("noise_sigma", cfg.data.noise_sigma);
      cfg.data.bar_half_width = d.value("bar_half_width", cfg.data.bar_half_width);
    }
    cfg.hidden = j.value("hidden", cfg.hidden);
    cfg.dropout = j.value("dropout", cfg.dropout);
    if (j.contains("train")) {
      const auto& t = j["train"];
      cfg.train.epochs = t.value("epochs", cfg.train.epochs);
      cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
      cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
      cfg.train.anneal_epochs = t.value("anneal_epochs", cfg.train.anneal_epochs);
      cfg.train.plateau_patience = t.value("plateau_patience", cfg.train.plateau_patience);
      cfg.train.lr_floor = t.value("lr_floor", cfg.train.lr_floor);
      cfg.train.lr_decay_factor = t.value("lr_decay_factor", cfg.train.lr_decay_factor);
      cfg.train.augment_fraction = t.value("augment_fraction", cfg.train.augment_fraction);
      const auto kl = t.value("kl_argument", std::string("misleading"));
      if (kl != "misleading" && kl != "raw") throw ConfigError("config: kl_argument must be misleading or raw");
      cfg.train.kl_argument = kl == "raw" ? KlArgument::Raw : KlArgument::MisleadingEvidence;
    }
    cfg.method = parse_method(j.value("method", to_string(cfg.method)));
    cfg.metric = parse_metric(j.value("metric", std::string(to_string(cfg.metric))));
    if (j.contains("conflict")) {
      const auto& c = j["conflict"];
      cfg.conflict.beta = c.value("beta", cfg.conflict.beta);
      cfg.conflict.lambda = c.value("lambda", cfg.conflict.lambda);
      cfg.conflict.delta = c.value("delta", cfg.conflict.delta);
      cfg.conflict.epsilon = c.value("epsilon", cfg.conflict.epsilon);
    }
    if (j.contains("transforms")) {
      const auto& t = j["transforms"];
      cfg.transforms.rotate_max_deg = t.value("rotate_max_deg", cfg.transforms.rotate_max_deg);
      cfg.transforms.shift_max_px = t.value("shift_max_px", cfg.transforms.shift_max_px);
      cfg.transforms.noise_sigma = t.value("noise_sigma", cfg.transforms.noise_sigma);
      cfg.transforms.views = t.value("views", cfg.transforms.views);
    }
    if (j.contains("attack")) {
      const auto& a = j["attack"];
      cfg.attack.kind = parse_attack(a.value("kind", std::string(to_string(cfg.attack.kind))));
      cfg.attack.epsilon = a.value("epsilon", cfg.attack.epsilon);
      cfg.attack.steps = a.value("steps", cfg.attack.steps);
      cfg.attack.step_size = a.value("step_size", cfg.attack.step_size);
      cfg.attack.objective = parse_objective(a.value("objective", std::string(objective_name(cfg.attack.objective))));
    }
    const auto cal = j.value("calibrate_with", std::string("method"));
    if (cal != "method" && cal != "edl") throw ConfigError("config: calibrate_with must be method or edl");
    cfg.calibrate_with = cal == "edl" ? CalibrateWith::BaseEdl : CalibrateWith::SameMethod;
    const auto adv = j.value("adv_cohort", std::string("ood"));
    if (adv != "ood" && adv != "id") throw ConfigError("config: adv_cohort must be ood or id");
    cfg.adv_cohort = adv == "id" ? AdvCohort::Id : AdvCohort::Ood;
    cfg.workers = j.value("workers", cfg.workers);
    cfg.record_timing = j.value("record_timing", cfg.record_timing);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["data"] = {{"id_family", to_string(cfg.data.id_family)},
               {"ood_family", to_string(cfg.data.ood_family)},
               {"classes", cfg.data.classes},
               {"size", cfg.data.size},
               {"n_per_class", cfg.data.n_per_class},
               {"ood_per_split", cfg.data.ood_per_split},
               {"fractions", cfg.data.fractions},
               {"angle_jitter_deg", cfg.data.angle_jitter_deg},
               {"offset_jitter_px", cfg.data.offset_jitter_px},
               {"noise_sigma", cfg.data.noise_sigma},
               {"bar_half_width", cfg.data.bar_half_width}};
  j["hidden"] = cfg.hidden;
  j["dropout"] = cfg.dropout;
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate},
                {"anneal_epochs", cfg.train.anneal_epochs},
                {"plateau_patience", cfg.train.plateau_patience},
                {"lr_floor", cfg.train.lr_floor},
                {"lr_decay_factor", cfg.train.lr_decay_factor},
                {"augment_fraction", cfg.train.augment_fraction},
                {"kl_argument", cfg.train.kl_argument == KlArgument::Raw ? "raw" : "misleading"}};
  j["method"] = to_string(cfg.method);
  j["metric"] = to_string(cfg.metric);
  j["conflict"] = {{"beta", cfg.conflict.beta},
                   {"lambda", cfg.conflict.lambda},
                   {"delta", cfg.conflict.delta},
                   {"epsilon", cfg.conflict.epsilon}};
  j["transforms"] = {{"rotate_max_deg", cfg.transforms.rotate_max_deg},
                     {"shift_max_px", cfg.transforms.shift_max_px},
                     {"noise_sigma", cfg.transforms.noise_sigma},
                     {"views", cfg.transforms.views}};
  j["attack"] = {{"kind", to_string(cfg.attack.kind)},
                 {"epsilon", cfg.attack.epsilon},
                 {"steps", cfg.attack.steps},
                 {"step_size", cfg.attack.step_size},
                 {"objective", objective_name(cfg.attack.objective)}};
  j["calibrate_with"] = cfg.calibrate_with == CalibrateWith::BaseEdl ? "edl" : "method";
  j["adv_cohort"] = cfg.adv_cohort == AdvCohort::Id ? "id" : "ood";
  j["workers"] = cfg.workers;
  j["record_timing"] = cfg.record_timing;
  return j.dump(2) + "\n";
}

Cohorts make_cohorts(const ExperimentConfig& cfg) {
  cfg.validate();
  SyntheticFamily id_family;
  id_family.kind = cfg.data.id_family;
  id_family.classes = cfg.data.classes;
  id_family.size = cfg.data.size;
  id_family.angle_jitter_deg = cfg.data.angle_jitter_deg;
  id_family.offset_jitter_px = cfg.data.offset_jitter_px;
  id_family.noise_sigma = cfg.data.noise_sigma;
  id_family.bar_half_width = cfg.data.bar_half_width;
  Rng data_rng = make_rng(cfg.seed, kStreamIdData);
  const LabeledDataset all = generate(id_family, cfg.data.n_per_class, data_rng);
  Rng split_rng = make_rng(cfg.seed, kStreamIdSplit);
  Cohorts c;
  std::tie(c.id_train, c.id_val, c.id_test) = split(all, cfg.data.fractions, split_rng);

  const std::size_t per_split = cfg.data.ood_per_split > 0 ? cfg.data.ood_per_split : c.id_val.size();
  SyntheticFamily ood_family = id_family;
  ood_family.kind = cfg.data.ood_family;
  Rng ood_rng = make_rng(cfg.seed, kStreamOodData);
  const std::size_t per_class = (2 * per_split + cfg.data.classes - 1) / cfg.data.classes;
  LabeledDataset ood = generate(ood_family, per_class, ood_rng);
  std::shuffle(ood.inputs.begin(), ood.inputs.end(), ood_rng);
  c.ood_val.num_classes = c.ood_test.num_classes = ood.num_classes;
  c.ood_val.split = SplitTag::Val;
  c.ood_test.split = SplitTag::Test;
  for (std::size_t i = 0; i < 2 * per_split; ++i) {
    auto& dst = i < per_split ? c.ood_val : c.ood_test;
    dst.inputs.push_back(ood.inputs[i]);
    dst.labels.push_back(0);
  }
  return c;
}

EvidentialNet train_model(const ExperimentConfig& cfg, const Cohorts& cohorts, TrainingLog* log) {
  NetConfig net_cfg;
  net_cfg.layer_sizes.push_back(cfg.data.size * cfg.data.size);
  net_cfg.layer_sizes.insert(net_cfg.layer_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  net_cfg.layer_sizes.push_back(cfg.data.classes);
  net_cfg.dropout_rate = cfg.dropout;
  net_cfg.seed = derive_seed(cfg.seed, kStreamNetInit);
  EvidentialNet net(net_cfg);
  Rng rng = make_rng(cfg.seed, kStreamTrain);
  TrainingLog l = train(net, cohorts.id_train, &cohorts.id_val, cfg.train, rng);
  if (log != nullptr) *log = std::move(l);
  return net;
}

std::vector<GridInput> attack_inputs(const EvidentialNet& net, const LabeledDataset& cohort, const AttackSpec& spec,
                                     std::uint64_t seed, std::size_t workers) {
  spec.validate();
  std::vector<GridInput> out(cohort.size());
  parallel_for(cohort.size(), workers, [&](std::size_t i) {
    const auto& x = cohort.inputs[i];
    const std::size_t y_ref =
        spec.objective == AttackObjective::MaximizeLoss ? cohort.labels[i] : forward(net, x.pixels).argmax();
    Rng rng = make_rng(seed, kStreamAttack, i);
    out[i] = attack(net, x, y_ref, spec, rng);
  });
  return out;
}

std::vector<SampleScore> score_inputs(const MethodKind& m, const EvidentialNet& net,
                                      const std::vector<GridInput>& inputs, const ExperimentConfig& cfg,
                                      std::uint64_t stream, double* mean_ms) {
  std::vector<SampleScore> out(inputs.size());
  std::vector<double> elapsed(inputs.size(), 0.0);
  parallel_for(inputs.size(), cfg.workers, [&](std::size_t i) {
    Rng rng = make_rng(cfg.seed, stream, i);
    const auto start = std::chrono::steady_clock::now();
    Prediction p = predict(m, net, inputs[i], cfg.transforms, cfg.conflict, rng);
    const double raw = score(p.alpha, cfg.metric);
    elapsed[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    out[i].raw = raw;
    out[i].predicted = p.alpha.argmax();
    out[i].conflict = p.conflict;
    out[i].alpha.assign(p.alpha.alpha().begin(), p.alpha.alpha().end());
  });
  if (mean_ms != nullptr) {
    double total = 0.0;
    for (const double e : elapsed) total += e;
    *mean_ms = inputs.empty() ? 0.0 : total / static_cast<double>(inputs.size());
  }
  return out;
}

namespace {

std::vector<double> oriented(const std::vector<SampleScore>& scores, MetricKind metric) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back(orient(s.raw, metric));
  return out;
}

std::vector<double> raw_scores(const std::vector<SampleScore>& scores) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back(s.raw);
  return out;
}

struct CohortOutcome {
  double coverage = 0.0;
  double delta = 0.0;
  double accuracy = 0.0;
};

CohortOutcome summarize_cohort(const std::string& name, const std::vector<SampleScore>& scores,
                               const std::vector<std::size_t>* labels, const ExperimentConfig& cfg,
                               const CalibratedThreshold& thr, std::vector<DecisionRecord>* decisions) {
  CohortOutcome out;
  if (scores.empty()) return out;
  std::size_t retained = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto d = decide(scores[i].raw, cfg.metric, thr);
    const std::size_t label = labels != nullptr ? (*labels)[i] : 0;
    if (d.retained) {
      ++retained;
      if (labels != nullptr && scores[i].predicted == label) ++correct;
    }
    if (decisions != nullptr) {
      decisions->push_back({name, i, label, scores[i].predicted, orient(scores[i].raw, cfg.metric), d.margin,
                            d.retained});
    }
  }
  out.coverage = static_cast<double>(retained) / static_cast<double>(scores.size());
  out.delta = delta_summary(raw_scores(scores), cfg.metric, thr);
  out.accuracy = retained > 0 ? static_cast<double>(correct) / static_cast<double>(retained) : 0.0;
  return out;
}

}  // namespace

CalibratedThreshold calibrate(const ExperimentConfig& cfg, const EvidentialNet& net, const Cohorts& cohorts) {
  if (cohorts.id_val.size() == 0 || cohorts.ood_val.size() == 0) {
    throw ConfigError("calibrate: ID and OOD validation cohorts must be nonempty");
  }
  const MethodKind m = cfg.calibrate_with == CalibrateWith::BaseEdl ? MethodKind{Method::EDL} : cfg.method;
  const auto id = score_inputs(m, net, cohorts.id_val.inputs, cfg, kStreamIdVal);
  const auto ood = score_inputs(m, net, cohorts.ood_val.inputs, cfg, kStreamOodVal);
  return fit_threshold(oriented(id, cfg.metric), oriented(ood, cfg.metric), cfg.metric);
}

CoverageReport evaluate(const ExperimentConfig& cfg, const EvaluationInputs& in,
                        std::vector<DecisionRecord>* decisions) {
  if (in.net == nullptr || in.cohorts == nullptr) throw ConfigError("evaluate: missing network or cohorts");
  const auto& c = *in.cohorts;
  if (c.id_test.size() == 0 || c.ood_test.size() == 0) throw ConfigError("evaluate: empty test cohort");
  const CalibratedThreshold thr = calibrate(cfg, *in.net, c);

  double mean_ms = 0.0;
  const auto id = score_inputs(cfg.method, *in.net, c.id_test.inputs, cfg, kStreamIdTest, &mean_ms);
  const auto ood = score_inputs(cfg.method, *in.net, c.ood_test.inputs, cfg, kStreamOodTest);

  CoverageReport r;
  r.method = to_string(cfg.method);
  r.metric = std::string(to_string(cfg.metric));
  r.attack = std::string(to_string(cfg.attack.kind));
  r.epsilon = cfg.attack.epsilon;
  r.seed = cfg.seed;
  r.cut = thr.cut;
  r.wall_ms = cfg.record_timing ? mean_ms : 0.0;

  const auto id_out = summarize_cohort("id", id, &c.id_test.labels, cfg, thr, decisions);
  const auto ood_out = summarize_cohort("ood", ood, nullptr, cfg, thr, decisions);
  r.id_accuracy = id_out.accuracy;
  r.id_coverage = id_out.coverage;
  r.delta_id = id_out.delta;
  r.ood_coverage = ood_out.coverage;
  r.delta_ood = ood_out.delta;
  r.n_id = id.size();
  r.n_ood = ood.size();
  if (in.attacked != nullptr && !in.attacked->empty()) {
    // Attacked input i draws the same views as its clean source, so a
    // zero-strength attack reproduces the clean cohort's decisions.
    const auto stream = cfg.adv_cohort == AdvCohort::Id ? kStreamIdTest : kStreamOodTest;
    const auto adv = score_inputs(cfg.method, *in.net, *in.attacked, cfg, stream);
    const auto adv_out = summarize_cohort("adv", adv, in.attacked_labels, cfg, thr, decisions);
    r.adv_coverage = adv_out.coverage;
    r.delta_adv = adv_out.delta;
    r.n_adv = adv.size();
  }
  return r;
}

CoverageReport run_experiment(const ExperimentConfig& cfg, std::vector<DecisionRecord>* decisions) {
  cfg.validate();
  const Cohorts cohorts = make_cohorts(cfg);
  const EvidentialNet net = train_model(cfg, cohorts);
  const LabeledDataset& target = cfg.adv_cohort == AdvCohort::Ood ? cohorts.ood_test : cohorts.id_test;
  const auto attacked = attack_inputs(net, target, cfg.attack, cfg.seed, cfg.workers);
  return evaluate(cfg, {&net, &cohorts, &attacked, &target.labels}, decisions);
}

AblationAxis parse_axis(std::string_view name) {
  if (name == "beta") return AblationAxis::Beta;
  if (name == "lambda") return AblationAxis::Lambda;
  if (name == "delta") return AblationAxis::Delta;
  if (name == "T") return AblationAxis::Views;
  if (name == "dropout") return AblationAxis::Dropout;
  if (name == "transform") return AblationAxis::Transform;
  throw ConfigError("unknown ablation axis '" + std::string(name) + "'");
}

std::string_view to_string(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::Beta:
      return "beta";
    case AblationAxis::Lambda:
      return "lambda";
    case AblationAxis::Delta:
      return "delta";
    case AblationAxis::Views:
      return "T";
    case AblationAxis::Dropout:
      return "dropout";
    case AblationAxis::Transform:
      return "transform";
  }
  return "unknown";
}

namespace {

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("expected a number, got '" + s + "'");
  return v;
}

}  // namespace

ExperimentConfig apply_axis(const ExperimentConfig& base, AblationAxis axis, const std::string& value) {
  ExperimentConfig cfg = base;
  switch (axis) {
    case AblationAxis::Beta:
      cfg.conflict.beta = parse_double(value);
      break;
    case AblationAxis::Lambda:
      cfg.conflict.lambda = parse_double(value);
      break;
    case AblationAxis::Delta:
      cfg.conflict.delta = parse_double(value);
      break;
    case AblationAxis::Views: {
      const double t = parse_double(value);
      if (t < 2 || t != std::floor(t)) throw ConfigError("T must be an integer >= 2");
      cfg.transforms.views = static_cast<std::size_t>(t);
      break;
    }
    case AblationAxis::Dropout:
      cfg.dropout = parse_double(value);
      break;
    case AblationAxis::Transform: {
      const TransformSpec defaults;
      cfg.transforms.rotate_max_deg = 0.0;
      cfg.transforms.shift_max_px = 0;
      cfg.transforms.noise_sigma = 0.0;
      if (value == "rotate" || value == "all") cfg.transforms.rotate_max_deg = defaults.rotate_max_deg;
      if (value == "shift" || value == "all") cfg.transforms.shift_max_px = defaults.shift_max_px;
      if (value == "noise" || value == "all") cfg.transforms.noise_sigma = defaults.noise_sigma;
      if (value != "rotate" && value != "shift" && value != "noise" && value != "all") {
        throw ConfigError("transform ablation value must be rotate, shift, noise or all");
      }
      break;
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<CoverageReport> ablate(AblationAxis axis, const std::vector<std::string>& values,
                                   const ExperimentConfig& base, const EvaluationInputs& in) {
  if (values.empty()) throw ConfigError("ablate: no values given");
  std::vector<CoverageReport> reports;
  for (const auto& v : values) {
    ExperimentConfig cfg = apply_axis(base, axis, v);
    cfg.record_timing = true;
    if (axis == AblationAxis::Dropout) {
      // Inference-time MC dropout strength; the trained weights are shared.
      EvidentialNet net = *in.net;
      net.set_dropout_rate(cfg.dropout);
      EvaluationInputs local = in;
      local.net = &net;
      reports.push_back(evaluate(cfg, local));
    } else {
      reports.push_back(evaluate(cfg, in));
    }
    reports.back().setting = std::string(to_string(axis)) + "=" + v;
  }
  return reports;
}

std::vector<CoverageReport> ablate(AblationAxis axis, const std::vector<std::string>& values,
                                   const ExperimentConfig& base) {
  base.validate();
  const Cohorts cohorts = make_cohorts(base);
  const EvidentialNet net = train_model(base, cohorts);
  const LabeledDataset& target = base.adv_cohort == AdvCohort::Ood ? cohorts.ood_test : cohorts.id_test;
  const auto attacked = attack_inputs(net, target, base.attack, base.seed, base.workers);
  return ablate(axis, values, base, {&net, &cohorts, &attacked, &target.labels});
}

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

nlohmann::ordered_json report_json(const CoverageReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["metric"] = r.metric;
  j["attack"] = r.attack;
  j["epsilon"] = r.epsilon;
  j["seed"] = r.seed;
  j["id_acc"] = r.id_accuracy;
  j["id_cov"] = r.id_coverage;
  j["ood_cov"] = r.ood_coverage;
  j["adv_cov"] = r.adv_coverage;
  j["delta_id"] = r.delta_id;
  j["delta_ood"] = r.delta_ood;
  j["delta_adv"] = r.delta_adv;
  j["n_id"] = r.n_id;
  j["n_ood"] = r.n_ood;
  j["n_adv"] = r.n_adv;
  j["cut"] = std::isinf(r.cut) ? nlohmann::ordered_json(r.cut > 0 ? "inf" : "-inf") : nlohmann::ordered_json(r.cut);
  j["wall_ms"] = r.wall_ms;
  j["setting"] = r.setting;
  return j;
}

CoverageReport report_from(const nlohmann::json& j) {
  CoverageReport r;
  r.method = j.at("method").get<std::string>();
  r.metric = j.at("metric").get<std::string>();
  r.attack = j.at("attack").get<std::string>();
  r.epsilon = j.at("epsilon").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.id_accuracy = j.at("id_acc").get<double>();
  r.id_coverage = j.at("id_cov").get<double>();
  r.ood_coverage = j.at("ood_cov").get<double>();
  r.adv_coverage = j.at("adv_cov").get<double>();
  r.delta_id = j.at("delta_id").get<double>();
  r.delta_ood = j.at("delta_ood").get<double>();
  r.delta_adv = j.at("delta_adv").get<double>();
  r.n_id = j.at("n_id").get<std::size_t>();
  r.n_ood = j.at("n_ood").get<std::size_t>();
  r.n_adv = j.at("n_adv").get<std::size_t>();
  const auto& cut = j.at("cut");
  if (cut.is_string()) {
    r.cut = cut.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                             : -std::numeric_limits<double>::infinity();
  } else {
    r.cut = cut.get<double>();
  }
  r.wall_ms = j.at("wall_ms").get<double>();
  r.setting = j.value("setting", std::string());
  return r;
}

}  // namespace

std::string reports_to_csv(const std::vector<CoverageReport>& reports) {
  std::string out(kReportCsvHeader);
  out += '\n';
  for (const auto& r : reports) {
    out += r.method + ',' + r.metric + ',' + r.attack + ',' + fmt_double(r.epsilon) + ',' +
           fmt_double(r.id_accuracy) + ',' + fmt_double(r.id_coverage) + ',' + fmt_double(r.ood_coverage) + ',' +
           fmt_double(r.adv_coverage) + ',' + fmt_double(r.delta_id) + ',' + fmt_double(r.delta_ood) + ',' +
           fmt_double(r.delta_adv) + ',' + std::to_string(r.seed) + ',' + fmt_double(r.wall_ms) + '\n';
  }
  return out;
}

std::string report_to_json(const CoverageReport& report) { return report_json(report).dump(2) + "\n"; }

std::string reports_to_json(const std::vector<CoverageReport>& reports) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr.dump(2) + "\n";
}

CoverageReport report_from_json(const std::string& text) {
  try {
    return report_from(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("report: ") + e.what(), e.byte);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what(), 0);
  }
}

std::vector<CoverageReport> reports_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    std::vector<CoverageReport> out;
    if (j.is_array()) {
      for (const auto& item : j) out.push_back(report_from(item));
    } else {
      out.push_back(report_from(j));
    }
    return out;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("report: ") + e.what(), e.byte);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what(), 0);
  }
}

std::string decisions_to_csv(const std::vector<DecisionRecord>& decisions) {
  std::string out = "cohort,index,label,predicted,oriented_score,margin,retained\n";
  for (const auto& d : decisions) {
    out += d.cohort + ',' + std::to_string(d.index) + ',' + std::to_string(d.label) + ',' +
           std::to_string(d.predicted) + ',' + fmt_double(d.oriented) + ',' + fmt_double(d.margin) + ',' +
           (d.retained ? "1" : "0") + '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void emit_report(const std::vector<CoverageReport>& reports, ReportFormat format, const std::filesystem::path& path) {
  write_text(path, format == ReportFormat::CSV ? reports_to_csv(reports) : reports_to_json(reports));
}

}  // namespace cedl
