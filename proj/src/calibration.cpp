#include "cedl/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

#include "cedl/error.hpp"

namespace cedl {

double orient(double raw_score, MetricKind metric) {
  return orientation_of(metric) == Orientation::HigherMeansConfident ? raw_score : -raw_score;
}

CalibratedThreshold fit_threshold(std::span<const double> id_scores, std::span<const double> ood_scores,
                                  MetricKind metric) {
  if (id_scores.empty() || ood_scores.empty()) {
    throw InvalidInput("fit_threshold: need at least one ID and one OOD score");
  }
  struct Tagged {
    double score;
    bool id;
  };
  std::vector<Tagged> pooled;
  pooled.reserve(id_scores.size() + ood_scores.size());
  for (const double s : id_scores) pooled.push_back({s, true});
  for (const double s : ood_scores) pooled.push_back({s, false});
  for (const auto& t : pooled) {
    if (std::isnan(t.score)) throw InvalidInput("fit_threshold: NaN score");
  }
  std::sort(pooled.begin(), pooled.end(), [](const Tagged& a, const Tagged& b) { return a.score < b.score; });

  const double n_id = static_cast<double>(id_scores.size());
  const double n_ood = static_cast<double>(ood_scores.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Sweep cuts upwards; counts are of scores strictly above the cut.
  std::size_t id_above = id_scores.size();
  std::size_t ood_above = ood_scores.size();
  CalibratedThreshold best;
  best.metric = metric;
  best.n_id = id_scores.size();
  best.n_ood = ood_scores.size();
  best.cut = -kInf;
  best.tpr = 1.0;
  best.fpr = 1.0;
  double best_j = 0.0;
  double best_gap = kInf;

  auto consider = [&](double cut, double gap) {
    const double tpr = static_cast<double>(id_above) / n_id;
    const double fpr = static_cast<double>(ood_above) / n_ood;
    const double j = tpr - fpr;
    if (j > best_j || (j == best_j && gap > best_gap)) {
      best_j = j;
      best_gap = gap;
      best.cut = cut;
      best.tpr = tpr;
      best.fpr = fpr;
    }
  };

  std::size_t i = 0;
  while (i < pooled.size()) {
    const double value = pooled[i].score;
    while (i < pooled.size() && pooled[i].score == value) {
      if (pooled[i].id) {
        --id_above;
      } else {
        --ood_above;
      }
      ++i;
    }
    if (i == pooled.size()) {
      consider(kInf, kInf);
    } else {
      const double next = pooled[i].score;
      consider(value + (next - value) / 2.0, next - value);
    }
  }
  return best;
}

AbstentionDecision decide(double raw_score, MetricKind metric, const CalibratedThreshold& thr) {
  if (metric != thr.metric) {
    throw ConfigError("decide: threshold was fitted on " + std::string(to_string(thr.metric)) + ", scoring with " +
                      std::string(to_string(metric)));
  }
  AbstentionDecision d;
  d.margin = orient(raw_score, metric) - thr.cut;
  d.retained = d.margin > 0.0;
  return d;
}

double delta_summary(std::span<const double> raw_scores, MetricKind metric, const CalibratedThreshold& thr) {
  if (raw_scores.empty()) throw InvalidInput("delta_summary: no scores");
  if (metric != thr.metric) throw ConfigError("delta_summary: metric does not match threshold");
  double acc = 0.0;
  for (const double s : raw_scores) acc += orient(s, metric) - thr.cut;
  return acc / static_cast<double>(raw_scores.size());
}

namespace {

nlohmann::json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double parse_number_or_inf(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ParseError("threshold: bad cut value '" + s + "'", 0);
  }
  return j.get<double>();
}

}  // namespace

std::string threshold_to_json(const CalibratedThreshold& thr) {
  nlohmann::ordered_json j;
  j["metric"] = std::string(to_string(thr.metric));
  j["cut"] = number_or_inf(thr.cut);
  j["n_id"] = thr.n_id;
  j["n_ood"] = thr.n_ood;
  j["tpr"] = thr.tpr;
  j["fpr"] = thr.fpr;
  return j.dump(2) + "\n";
}

CalibratedThreshold threshold_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    CalibratedThreshold thr;
    thr.metric = parse_metric(j.at("metric").get<std::string>());
    thr.cut = parse_number_or_inf(j.at("cut"));
    thr.n_id = j.at("n_id").get<std::size_t>();
    thr.n_ood = j.at("n_ood").get<std::size_t>();
    thr.tpr = j.at("tpr").get<double>();
    thr.fpr = j.at("fpr").get<double>();
    return thr;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("threshold: ") + e.what(), e.byte);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("threshold: ") + e.what(), 0);
  }
}

}  // namespace cedl
