#include "cedl/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cedl/error.hpp"
#include "cedl/special.hpp"

namespace cedl {

DirichletParams::DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 2) {
    throw InvalidInput("DirichletParams: need at least 2 classes, got " + std::to_string(alpha_.size()));
  }
  for (std::size_t k = 0; k < alpha_.size(); ++k) {
    if (!std::isfinite(alpha_[k]) || !(alpha_[k] > 0.0)) {
      throw InvalidInput("DirichletParams: alpha[" + std::to_string(k) + "] must be finite and > 0");
    }
  }
}

double DirichletParams::strength() const { return std::accumulate(alpha_.begin(), alpha_.end(), 0.0); }

std::size_t DirichletParams::argmax() const {
  return static_cast<std::size_t>(std::max_element(alpha_.begin(), alpha_.end()) - alpha_.begin());
}

Orientation orientation_of(MetricKind kind) {
  switch (kind) {
    case MetricKind::DifferentialEntropy:
    case MetricKind::MutualInformation:
      return Orientation::HigherMeansUncertain;
    case MetricKind::TotalEvidence:
      return Orientation::HigherMeansConfident;
  }
  throw ConfigError("unknown metric kind");
}

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::DifferentialEntropy:
      return "diff-entropy";
    case MetricKind::TotalEvidence:
      return "total-evidence";
    case MetricKind::MutualInformation:
      return "mutual-info";
  }
  throw ConfigError("unknown metric kind");
}

MetricKind parse_metric(std::string_view name) {
  if (name == "diff-entropy") return MetricKind::DifferentialEntropy;
  if (name == "total-evidence") return MetricKind::TotalEvidence;
  if (name == "mutual-info") return MetricKind::MutualInformation;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

EvidentialSummary summarize(std::span<const double> alpha) {
  EvidentialSummary out;
  out.strength = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  out.belief.resize(alpha.size());
  out.expected_prob.resize(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    out.belief[k] = (alpha[k] - 1.0) / out.strength;
    out.expected_prob[k] = alpha[k] / out.strength;
  }
  out.uncertainty = static_cast<double>(alpha.size()) / out.strength;
  return out;
}

EvidentialSummary summarize(const DirichletParams& p) { return summarize(p.alpha()); }

double differential_entropy(const DirichletParams& p) {
  const double s = p.strength();
  const double psi_s = digamma(s);
  double h = -log_gamma(s);
  for (const double a : p.alpha()) {
    h += log_gamma(a) - (a - 1.0) * (digamma(a) - psi_s);
  }
  return h;
}

double total_evidence(const DirichletParams& p) { return p.strength(); }

double mutual_information(const DirichletParams& p) {
  const double s = p.strength();
  const double psi_s1 = digamma(s + 1.0);
  double mi = 0.0;
  for (const double a : p.alpha()) {
    const double m = a / s;
    mi -= m * (std::log(m) - digamma(a + 1.0) + psi_s1);
  }
  return mi;
}

double score(const DirichletParams& p, MetricKind kind) {
  switch (kind) {
    case MetricKind::DifferentialEntropy:
      return differential_entropy(p);
    case MetricKind::TotalEvidence:
      return total_evidence(p);
    case MetricKind::MutualInformation:
      return mutual_information(p);
  }
  throw ConfigError("unknown metric kind");
}

}  // namespace cedl
