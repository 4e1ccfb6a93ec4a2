#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cedl/attacks.hpp"
#include "cedl/calibration.hpp"
#include "cedl/conflict.hpp"
#include "cedl/datagen.hpp"
#include "cedl/net.hpp"
#include "cedl/train.hpp"
#include "cedl/views.hpp"

namespace cedl {

enum class Method {
  EDL,    // single deterministic forward
  EDLpp,  // mean of the view evidence, no decay
  CEDL,   // mean of the view evidence decayed by conflict
};

struct MethodKind {
  Method method = Method::CEDL;
  ViewMode views = ViewMode::Metamorphic;

  friend bool operator==(const MethodKind&, const MethodKind&) = default;
};

// edl, edlpp-meta, edlpp-mc, cedl-meta, cedl-mc
std::string to_string(const MethodKind& m);
MethodKind parse_method(std::string_view name);

struct Prediction {
  DirichletParams alpha;
  std::optional<ConflictBreakdown> conflict;
};

// EDL ignores `spec`; the other methods override spec.mode with m.views.
Prediction predict(const MethodKind& m, const EvidentialNet& net, const GridInput& x, const TransformSpec& spec,
                   const ConflictParams& params, Rng& rng);

// Runs fn(i) for i in [0, n) over `workers` threads. Results must be
// written by index; callers reduce in index order.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

enum class CalibrateWith { SameMethod, BaseEdl };
enum class AdvCohort { Ood, Id };

struct DataConfig {
  FamilyKind id_family = FamilyKind::Bars;
  FamilyKind ood_family = FamilyKind::CrossesOOD;
  std::size_t classes = 4;
  std::size_t size = 16;
  std::size_t n_per_class = 625;
  // OOD samples in each of the val and test cohorts; 0 matches the ID sizes.
  std::size_t ood_per_split = 0;
  std::array<double, 3> fractions = {0.8, 0.1, 0.1};
  // Generator jitter, shared by the ID and OOD families.
  double angle_jitter_deg = SyntheticFamily{}.angle_jitter_deg;
  double offset_jitter_px = SyntheticFamily{}.offset_jitter_px;
  double noise_sigma = SyntheticFamily{}.noise_sigma;
  double bar_half_width = SyntheticFamily{}.bar_half_width;
};

// Experiment training defaults: 100 epochs, every epoch augmented.
inline TrainConfig experiment_train_defaults() {
  TrainConfig t;
  t.epochs = 100;
  t.augment_fraction = 1.0;
  return t;
}

// Calibration attack: L2PGD at the smallest radius whose MaximizeLoss
// variant costs the default Bars model at least 20 points of ID accuracy.
inline constexpr double kCalibrationEpsilon = 1.6;

inline AttackSpec experiment_attack_defaults() {
  AttackSpec a;
  a.epsilon = kCalibrationEpsilon;
  return a;
}

struct ExperimentConfig {
  std::uint64_t seed = 1;
  DataConfig data;
  std::vector<std::size_t> hidden = {64, 32};
  double dropout = 0.25;
  TrainConfig train = experiment_train_defaults();
  MethodKind method;
  MetricKind metric = MetricKind::DifferentialEntropy;
  ConflictParams conflict;
  TransformSpec transforms;
  AttackSpec attack = experiment_attack_defaults();
  CalibrateWith calibrate_with = CalibrateWith::SameMethod;
  AdvCohort adv_cohort = AdvCohort::Ood;
  std::size_t workers = 1;
  bool record_timing = false;

  void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

struct Cohorts {
  LabeledDataset id_train;
  LabeledDataset id_val;
  LabeledDataset id_test;
  LabeledDataset ood_val;
  LabeledDataset ood_test;
};

Cohorts make_cohorts(const ExperimentConfig& cfg);

EvidentialNet train_model(const ExperimentConfig& cfg, const Cohorts& cohorts, TrainingLog* log = nullptr);

// Attacked copies of `inputs`. y_ref is the true label under MaximizeLoss
// and the clean EDL argmax under MaximizeConfidence.
std::vector<GridInput> attack_inputs(const EvidentialNet& net, const LabeledDataset& cohort, const AttackSpec& spec,
                                     std::uint64_t seed, std::size_t workers);

struct SampleScore {
  double raw = 0.0;
  std::size_t predicted = 0;
  std::optional<ConflictBreakdown> conflict;
  // The method's Dirichlet parameters (decayed for C-EDL).
  std::vector<double> alpha;
};

// Scores every input with per-sample seeds derived from (seed, stream, i).
std::vector<SampleScore> score_inputs(const MethodKind& m, const EvidentialNet& net,
                                      const std::vector<GridInput>& inputs, const ExperimentConfig& cfg,
                                      std::uint64_t stream, double* mean_ms = nullptr);

struct CoverageReport {
  std::string method;
  std::string metric;
  std::string attack;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  double id_accuracy = 0.0;
  double id_coverage = 0.0;
  double ood_coverage = 0.0;
  double adv_coverage = 0.0;
  double delta_id = 0.0;
  double delta_ood = 0.0;
  double delta_adv = 0.0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
  std::size_t n_adv = 0;
  double cut = 0.0;
  double wall_ms = 0.0;
  // Free-form "axis=value" echo for ablation rows.
  std::string setting;

  friend bool operator==(const CoverageReport&, const CoverageReport&) = default;
};

struct DecisionRecord {
  std::string cohort;
  std::size_t index = 0;
  std::size_t label = 0;
  std::size_t predicted = 0;
  double oriented = 0.0;
  double margin = 0.0;
  bool retained = false;
};

// Everything a single evaluation needs besides the config.
struct EvaluationInputs {
  const EvidentialNet* net = nullptr;
  const Cohorts* cohorts = nullptr;
  // Attacked cohort; empty -> skip (adv fields stay 0).
  const std::vector<GridInput>* attacked = nullptr;
  // Labels for the attacked cohort (ID accuracy is not computed on it).
  const std::vector<std::size_t>* attacked_labels = nullptr;
};

CalibratedThreshold calibrate(const ExperimentConfig& cfg, const EvidentialNet& net, const Cohorts& cohorts);

CoverageReport evaluate(const ExperimentConfig& cfg, const EvaluationInputs& in,
                        std::vector<DecisionRecord>* decisions = nullptr);

// Cohorts, training, attack and evaluation in one call.
CoverageReport run_experiment(const ExperimentConfig& cfg, std::vector<DecisionRecord>* decisions = nullptr);

enum class AblationAxis { Beta, Lambda, Delta, Views, Dropout, Transform };
AblationAxis parse_axis(std::string_view name);
std::string_view to_string(AblationAxis axis);

// Returns `base` with `axis` set to `value`. Transform accepts
// rotate | shift | noise | all.
ExperimentConfig apply_axis(const ExperimentConfig& base, AblationAxis axis, const std::string& value);

// One report per value over a shared trained network, cohorts and attack.
// Timing is always recorded.
std::vector<CoverageReport> ablate(AblationAxis axis, const std::vector<std::string>& values,
                                   const ExperimentConfig& base, const EvaluationInputs& in);
std::vector<CoverageReport> ablate(AblationAxis axis, const std::vector<std::string>& values,
                                   const ExperimentConfig& base);

enum class ReportFormat { CSV, JSON };

inline constexpr std::string_view kReportCsvHeader =
    "method,metric,attack,epsilon,id_acc,id_cov,ood_cov,adv_cov,delta_id,delta_ood,delta_adv,seed,wall_ms";

std::string reports_to_csv(const std::vector<CoverageReport>& reports);
std::string reports_to_json(const std::vector<CoverageReport>& reports);
std::string report_to_json(const CoverageReport& report);
CoverageReport report_from_json(const std::string& text);
std::vector<CoverageReport> reports_from_json(const std::string& text);
std::string decisions_to_csv(const std::vector<DecisionRecord>& decisions);

void emit_report(const std::vector<CoverageReport>& reports, ReportFormat format, const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cedl
