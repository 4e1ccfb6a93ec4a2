#pragma once

#include <span>
#include <vector>

#include "cedl/dirichlet.hpp"

namespace cedl {

// T >= 2 Dirichlet parameter rows over a shared K, one per view of an input.
class EvidenceSet {
 public:
  explicit EvidenceSet(std::vector<std::vector<double>> rows);
  explicit EvidenceSet(const std::vector<DirichletParams>& rows);

  std::size_t num_views() const { return rows_.size(); }
  std::size_t num_classes() const { return rows_.front().size(); }
  std::span<const double> row(std::size_t t) const { return rows_[t]; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

 private:
  std::vector<std::vector<double>> rows_;
};

struct ConflictParams {
  double beta = 1.5;
  double lambda = 0.5;
  double delta = 1.0;
  double epsilon = 1e-8;

  // Throws InvalidInput unless beta, delta, epsilon > 0 and lambda in [0, 1].
  // delta == 0 is accepted and disables the decay.
  void validate() const;
};

struct ConflictBreakdown {
  double c_intra = 0.0;
  double c_inter = 0.0;
  double c_total = 0.0;
};

struct AdjustedPrediction {
  std::vector<double> alpha_bar;
  std::vector<double> alpha_tilde;
  EvidentialSummary summary;
  ConflictBreakdown conflict;
};

// Mean over classes of the coefficient of variation (population sigma over
// mean + eps) of each class's parameter across views.
double c_intra(const EvidenceSet& es, double eps = 1e-8);

// Mean over views of the saturated pairwise contradiction term.
double c_inter(const EvidenceSet& es, double beta);

// Inclusion-exclusion with asymmetry penalty:
//   C = inter + intra - inter * intra - lambda * (inter - intra)^2
double combine(double c_inter, double c_intra, double lambda);

// Per-class mean over views.
std::vector<double> aggregate(const EvidenceSet& es);

ConflictBreakdown conflict(const EvidenceSet& es, const ConflictParams& params);

// Aggregate, score conflict, and decay every aggregated entry by exp(-delta C).
AdjustedPrediction adjust(const EvidenceSet& es, const ConflictParams& params);

namespace detail {
// One view's contribution 1 - exp(-beta * sum_{k<j} (...)^2); exposed so the
// single-view case can be tested without an EvidenceSet.
double inter_view_term(std::span<const double> alpha, double beta);
}  // namespace detail

}  // namespace cedl
