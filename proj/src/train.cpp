#include "cedl/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "cedl/error.hpp"

namespace cedl {

void TrainConfig::validate() const {
  if (epochs < 0) throw InvalidInput("TrainConfig: epochs must be >= 0");
  if (batch_size == 0) throw InvalidInput("TrainConfig: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidInput("TrainConfig: learning_rate must be > 0");
  if (anneal_epochs < 1) throw InvalidInput("TrainConfig: anneal_epochs must be >= 1");
  if (plateau_patience < 1) throw InvalidInput("TrainConfig: plateau_patience must be >= 1");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0)) {
    throw InvalidInput("TrainConfig: lr_decay_factor must lie in (0, 1)");
  }
  if (!(lr_floor >= 0.0)) throw InvalidInput("TrainConfig: lr_floor must be >= 0");
  if (!(augment_fraction >= 0.0 && augment_fraction <= 1.0)) {
    throw InvalidInput("TrainConfig: augment_fraction must lie in [0, 1]");
  }
  if (augment_fraction > 0.0) augment.validate();
}

double kl_weight_for_epoch(int epoch, int anneal_epochs) {
  return std::min(1.0, static_cast<double>(epoch) / static_cast<double>(anneal_epochs));
}

std::string TrainingLog::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,val_loss,lr,kl_weight\n";
  for (const auto& e : epochs) {
    out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.learning_rate << ',' << e.kl_weight
        << '\n';
  }
  return out.str();
}

AdamOptimizer::AdamOptimizer(const EvidentialNet& net) : m_(make_zero_gradients(net)), v_(make_zero_gradients(net)) {}

void AdamOptimizer::step(EvidentialNet& net, const Gradients& grad, double learning_rate) {
  ++step_count_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_count_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_count_));
  auto update = [&](std::vector<double>& param, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      param[i] -= learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
    }
  };
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights, grad.weights[l], m_.weights[l], v_.weights[l]);
    update(layers[l].bias, grad.bias[l], m_.bias[l], v_.bias[l]);
  }
}

double mean_loss(const EvidentialNet& net, const LabeledDataset& ds, double kl_weight, KlArgument kl_arg) {
  if (ds.size() == 0) throw InvalidInput("mean_loss: empty dataset");
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto y = one_hot(ds.labels[i], ds.num_classes);
    total += edl_loss(forward(net, ds.inputs[i].pixels), y, kl_weight, kl_arg);
  }
  return total / static_cast<double>(ds.size());
}

double accuracy(const EvidentialNet& net, const LabeledDataset& ds) {
  if (ds.size() == 0) throw InvalidInput("accuracy: empty dataset");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (forward(net, ds.inputs[i].pixels).argmax() == ds.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

TrainingLog train(EvidentialNet& net, const LabeledDataset& train_set, const LabeledDataset* val_set,
                  const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (train_set.size() == 0) throw InvalidInput("train: empty dataset");
  train_set.validate();
  if (train_set.num_classes != net.num_classes()) throw ShapeError("train: dataset class count does not match net");
  if (train_set.inputs.front().size() != net.input_dim()) throw ShapeError("train: input size does not match net");
  if (val_set != nullptr && val_set->size() == 0) val_set = nullptr;

  TrainingLog log;
  AdamOptimizer adam(net);
  double lr = cfg.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  int wait = 0;
  const bool dropout = net.config().dropout_rate > 0.0;
  std::bernoulli_distribution augment(cfg.augment_fraction);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double kl_weight = kl_weight_for_epoch(epoch, cfg.anneal_epochs);
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      Gradients batch = make_zero_gradients(net);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        const auto y = one_hot(train_set.labels[i], train_set.num_classes);
        DropoutMask mask;
        if (dropout) mask = sample_dropout_mask(net, rng);
        const GridInput* x = &train_set.inputs[i];
        GridInput view;
        if (cfg.augment_fraction > 0.0 && augment(rng)) {
          view = metamorphic_view(*x, cfg.augment, rng);
          x = &view;
        }
        const Gradients g = backward(net, x->pixels, y, kl_weight, dropout ? &mask : nullptr, cfg.kl_argument);
        epoch_loss += g.loss;
        for (std::size_t l = 0; l < g.weights.size(); ++l) {
          for (std::size_t j = 0; j < g.weights[l].size(); ++j) batch.weights[l][j] += g.weights[l][j];
          for (std::size_t j = 0; j < g.bias[l].size(); ++j) batch.bias[l][j] += g.bias[l][j];
        }
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t l = 0; l < batch.weights.size(); ++l) {
        for (double& v : batch.weights[l]) v *= scale;
        for (double& v : batch.bias[l]) v *= scale;
      }
      adam.step(net, batch, lr);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(order.size());
    rec.val_loss = val_set != nullptr ? mean_loss(net, *val_set, kl_weight, cfg.kl_argument) : rec.train_loss;
    rec.learning_rate = lr;
    rec.kl_weight = kl_weight;
    log.epochs.push_back(rec);

    if (rec.val_loss < best - cfg.plateau_tolerance) {
      best = rec.val_loss;
      wait = 0;
    } else if (++wait >= cfg.plateau_patience) {
      lr = std::max(lr * cfg.lr_decay_factor, cfg.lr_floor);
      wait = 0;
    }
  }
  return log;
}

}  // namespace cedl
