#pragma once

#include <span>
#include <string>

#include "cedl/dirichlet.hpp"

namespace cedl {

struct CalibratedThreshold {
  MetricKind metric = MetricKind::TotalEvidence;
  // Oriented cut: retain iff orient(score) > cut. May be +/-infinity when no
  // finite cut does better.
  double cut = 0.0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
  double tpr = 0.0;
  double fpr = 0.0;

  double youden() const { return tpr - fpr; }
};

struct AbstentionDecision {
  bool retained = false;
  double margin = 0.0;
};

// Larger is always more ID-like: negates uncertainty-oriented metrics.
double orient(double raw_score, MetricKind metric);

// ROC operating point maximising TPR - FPR with ID as the positive class.
// Scores must already be oriented. Candidate cuts are the midpoints between
// adjacent distinct pooled scores plus -inf and +inf; ties go to the widest
// gap. The returned threshold carries `metric` unchanged.
CalibratedThreshold fit_threshold(std::span<const double> id_scores, std::span<const double> ood_scores,
                                  MetricKind metric = MetricKind::TotalEvidence);

// margin = orient(raw_score) - cut; retained iff margin > 0.
AbstentionDecision decide(double raw_score, MetricKind metric, const CalibratedThreshold& thr);

// Mean over every sample of orient(raw) - cut.
double delta_summary(std::span<const double> raw_scores, MetricKind metric, const CalibratedThreshold& thr);

// {"metric", "cut", "n_id", "n_ood", "tpr", "fpr"}; infinite cuts are
// written as the strings "inf" / "-inf".
std::string threshold_to_json(const CalibratedThreshold& thr);
CalibratedThreshold threshold_from_json(const std::string& text);

}  // namespace cedl
