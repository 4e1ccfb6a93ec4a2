#include "cedl/conflict.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cedl/error.hpp"

namespace cedl {

EvidenceSet::EvidenceSet(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
  if (rows_.size() < 2) {
    throw InvalidInput("EvidenceSet: need at least 2 views, got " + std::to_string(rows_.size()));
  }
  const std::size_t k = rows_.front().size();
  if (k < 2) throw InvalidInput("EvidenceSet: need at least 2 classes");
  for (std::size_t t = 0; t < rows_.size(); ++t) {
    if (rows_[t].size() != k) {
      throw InvalidInput("EvidenceSet: row " + std::to_string(t) + " has " + std::to_string(rows_[t].size()) +
                         " classes, expected " + std::to_string(k));
    }
    for (const double a : rows_[t]) {
      if (!std::isfinite(a) || a < 1.0) {
        throw InvalidInput("EvidenceSet: entries must be finite and >= 1 (row " + std::to_string(t) + ")");
      }
    }
  }
}

EvidenceSet::EvidenceSet(const std::vector<DirichletParams>& rows)
    : EvidenceSet([&rows] {
        std::vector<std::vector<double>> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.emplace_back(r.alpha().begin(), r.alpha().end());
        return out;
      }()) {}

void ConflictParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidInput("ConflictParams: beta must be > 0");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("ConflictParams: lambda must lie in [0, 1]");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidInput("ConflictParams: delta must be >= 0");
  if (!(epsilon > 0.0)) throw InvalidInput("ConflictParams: epsilon must be > 0");
}

double c_intra(const EvidenceSet& es, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("c_intra: eps must be > 0");
  const std::size_t views = es.num_views();
  const std::size_t classes = es.num_classes();
  const double inv_t = 1.0 / static_cast<double>(views);
  double acc = 0.0;
  for (std::size_t k = 0; k < classes; ++k) {
    // Offsets from the first view keep a constant column at exactly zero.
    const double origin = es.row(0)[k];
    double shift = 0.0;
    for (std::size_t t = 0; t < views; ++t) shift += es.row(t)[k] - origin;
    shift *= inv_t;
    double var = 0.0;
    for (std::size_t t = 0; t < views; ++t) {
      const double d = es.row(t)[k] - origin - shift;
      var += d * d;
    }
    acc += std::sqrt(var * inv_t) / (origin + shift + eps);
  }
  return acc / static_cast<double>(classes);
}

namespace detail {

double inter_view_term(std::span<const double> alpha, double beta) {
  if (!(beta > 0.0)) throw InvalidInput("c_inter: beta must be > 0");
  double s = 0.0;
  for (const double a : alpha) s += a;
  double x = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    for (std::size_t j = k + 1; j < alpha.size(); ++j) {
      const double lo = std::min(alpha[k], alpha[j]);
      const double hi = std::max(alpha[k], alpha[j]);
      const double f = (lo / hi) * (lo / s) * 2.0;
      x += f * f;
    }
  }
  return -std::expm1(-beta * x);
}

}  // namespace detail

double c_inter(const EvidenceSet& es, double beta) {
  double acc = 0.0;
  for (std::size_t t = 0; t < es.num_views(); ++t) acc += detail::inter_view_term(es.row(t), beta);
  return acc / static_cast<double>(es.num_views());
}

double combine(double c_inter, double c_intra, double lambda) {
  if (!(c_inter >= 0.0 && c_inter <= 1.0)) throw InvalidInput("combine: c_inter must lie in [0, 1]");
  if (!(c_intra >= 0.0)) throw InvalidInput("combine: c_intra must be >= 0");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("combine: lambda must lie in [0, 1]");
  const double gap = c_inter - c_intra;
  return c_inter + c_intra - c_inter * c_intra - lambda * gap * gap;
}

std::vector<double> aggregate(const EvidenceSet& es) {
  std::vector<double> out(es.num_classes(), 0.0);
  for (std::size_t t = 0; t < es.num_views(); ++t) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += es.row(t)[k];
  }
  const double inv_t = 1.0 / static_cast<double>(es.num_views());
  for (double& v : out) v *= inv_t;
  return out;
}

ConflictBreakdown conflict(const EvidenceSet& es, const ConflictParams& params) {
  params.validate();
  ConflictBreakdown out;
  out.c_intra = c_intra(es, params.epsilon);
  out.c_inter = c_inter(es, params.beta);
  out.c_total = combine(out.c_inter, out.c_intra, params.lambda);
  return out;
}

AdjustedPrediction adjust(const EvidenceSet& es, const ConflictParams& params) {
  AdjustedPrediction out;
  out.conflict = conflict(es, params);
  out.alpha_bar = aggregate(es);
  const double decay = std::exp(-params.delta * out.conflict.c_total);
  out.alpha_tilde.resize(out.alpha_bar.size());
  for (std::size_t k = 0; k < out.alpha_bar.size(); ++k) out.alpha_tilde[k] = out.alpha_bar[k] * decay;
  out.summary = summarize(out.alpha_tilde);
  return out;
}

}  // namespace cedl
