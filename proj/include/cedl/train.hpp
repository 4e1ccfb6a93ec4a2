#pragma once

#include <string>
#include <vector>

#include "cedl/dataset.hpp"
#include "cedl/loss.hpp"
#include "cedl/net.hpp"
#include "cedl/rng.hpp"
#include "cedl/views.hpp"

namespace cedl {

struct TrainConfig {
  int epochs = 50;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  int anneal_epochs = 10;
  int plateau_patience = 5;
  double lr_floor = 1e-8;
  double lr_decay_factor = 0.5;
  // Minimum improvement over the best validation loss that resets patience.
  double plateau_tolerance = 1e-6;
  KlArgument kl_argument = KlArgument::MisleadingEvidence;
  // Probability that a training sample is replaced, per epoch, by a fresh
  // metamorphic view drawn from `augment`. 0 disables augmentation.
  double augment_fraction = 0.0;
  TransformSpec augment;

  void validate() const;
};

// KL weight for 1-indexed `epoch`: min(1, epoch / anneal_epochs).
double kl_weight_for_epoch(int epoch, int anneal_epochs);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
  double kl_weight = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;

  // epoch,train_loss,val_loss,lr,kl_weight
  std::string to_csv() const;

  friend bool operator==(const TrainingLog&, const TrainingLog&) = default;
};

// Element-wise Adam (beta1 0.9, beta2 0.999, eps 1e-8) over all parameters.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const EvidentialNet& net);
  void step(EvidentialNet& net, const Gradients& grad, double learning_rate);

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  Gradients m_;
  Gradients v_;
  long step_count_ = 0;
};

// Minibatch Adam with linear KL annealing and reduce-on-plateau on the
// validation loss (train loss when `val` is null). Updates `net` in place.
TrainingLog train(EvidentialNet& net, const LabeledDataset& train_set, const LabeledDataset* val_set,
                  const TrainConfig& cfg, Rng& rng);

// Mean edl_loss over a dataset using deterministic forwards.
double mean_loss(const EvidentialNet& net, const LabeledDataset& ds, double kl_weight,
                 KlArgument kl_arg = KlArgument::MisleadingEvidence);

double accuracy(const EvidentialNet& net, const LabeledDataset& ds);

}  // namespace cedl
