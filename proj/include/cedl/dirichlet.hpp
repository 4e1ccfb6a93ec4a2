#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace cedl {

// Concentration vector of a K-class Dirichlet. Construction validates
// K >= 2 and that every entry is finite and strictly positive.
class DirichletParams {
 public:
  explicit DirichletParams(std::vector<double> alpha);

  std::span<const double> alpha() const { return alpha_; }
  double operator[](std::size_t k) const { return alpha_[k]; }
  std::size_t num_classes() const { return alpha_.size(); }
  double strength() const;
  std::size_t argmax() const;

  friend bool operator==(const DirichletParams&, const DirichletParams&) = default;

 private:
  std::vector<double> alpha_;
};

struct EvidentialSummary {
  double strength = 0.0;
  std::vector<double> belief;
  double uncertainty = 0.0;
  std::vector<double> expected_prob;
};

enum class MetricKind { DifferentialEntropy, TotalEvidence, MutualInformation };

enum class Orientation { HigherMeansUncertain, HigherMeansConfident };

Orientation orientation_of(MetricKind kind);
std::string_view to_string(MetricKind kind);
// Accepts the CLI spellings: diff-entropy, total-evidence, mutual-info.
MetricKind parse_metric(std::string_view name);

// Strength, belief masses, uncertainty mass and expected probabilities.
EvidentialSummary summarize(const DirichletParams& p);

// Same quantities for an arbitrary positive vector; used where the vector
// is already known valid (decayed parameters).
EvidentialSummary summarize(std::span<const double> alpha);

double differential_entropy(const DirichletParams& p);
double total_evidence(const DirichletParams& p);
double mutual_information(const DirichletParams& p);

// Raw metric value; orientation is left to the calibration layer.
double score(const DirichletParams& p, MetricKind kind);

}  // namespace cedl
