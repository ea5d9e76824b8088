#include "relsum/trainer.hpp"

#include <cmath>
#include <numeric>

#include "relsum/error.hpp"
#include "relsum/rng.hpp"

namespace relsum {

AdamOptimizer::AdamOptimizer(const SummarizerModel& shape, AdamOptions options)
    : options_(options), m_(shape.zeros_like()), v_(shape.zeros_like()) {}

void AdamOptimizer::step(SummarizerModel& model, const SummarizerModel& grads) {
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  auto params = model.tensors();
  const auto g = grads.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t k = 0; k < params.size(); ++k) {
    Eigen::MatrixXd& p = *params[k].value;
    const Eigen::MatrixXd& gk = *g[k].value;
    Eigen::MatrixXd& mk = *m[k].value;
    Eigen::MatrixXd& vk = *v[k].value;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double gi = gk.data()[i];
      mk.data()[i] = b1 * mk.data()[i] + (1.0 - b1) * gi;
      vk.data()[i] = b2 * vk.data()[i] + (1.0 - b2) * gi * gi;
      const double mhat = mk.data()[i] / correction1;
      const double vhat = vk.data()[i] / correction2;
      p.data()[i] -= options_.learning_rate * mhat / (std::sqrt(vhat) + options_.epsilon);
    }
  }
}

namespace {

bool all_finite(const SummarizerModel& model) {
  for (const auto& t : model.tensors())
    if (!t.value->allFinite()) return false;
  return true;
}

}  // namespace

TrainResult train(SummarizerModel model, const AttentionConfig& cfg,
                  std::span<const TrainingExample> dataset, const TrainOptions& options,
                  const EpochCallback& on_epoch) {
  if (dataset.empty()) throw Error(ErrorCategory::invalid_argument, "training set is empty");
  AdamOptimizer adam(model, options.adam);
  Rng rng(options.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainResult result;
  SummarizerModel grads = model.zeros_like();
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    if (options.shuffle) rng.shuffle(order);
    double total = 0.0;
    for (std::size_t k : order) {
      const TrainingExample& ex = dataset[k];
      for (auto& t : grads.tensors()) t.value->setZero();
      const double loss = loss_and_gradients(model, cfg, ex.input, ex.labels, grads);
      if (!std::isfinite(loss) || !all_finite(grads))
        throw Error(ErrorCategory::non_finite,
                    "non-finite loss or gradient on target " + ex.target_id + " in epoch " +
                        std::to_string(epoch));
      total += loss;
      adam.step(model, grads);
    }
    const double mean = total / static_cast<double>(dataset.size());
    result.epoch_mean_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace relsum
