#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "relsum/summarizer.hpp"

namespace relsum {

struct AdamOptions {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const SummarizerModel& shape, AdamOptions options);

  void step(SummarizerModel& model, const SummarizerModel& grads);
  std::size_t steps_taken() const { return t_; }

 private:
  AdamOptions options_;
  std::size_t t_ = 0;
  SummarizerModel m_;
  SummarizerModel v_;
};

struct TrainingExample {
  std::string target_id;
  SummarizerInput input;
  std::vector<int> labels;
};

struct TrainOptions {
  std::size_t epochs = 20;
  AdamOptions adam;
  std::uint64_t seed = 0;
  bool shuffle = true;  // visit order of targets within each epoch
};

struct TrainResult {
  SummarizerModel model;
  std::vector<double> epoch_mean_loss;  // loss before each update, averaged per epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// One target per Adam step. Throws Error(non_finite) naming the target if
/// a loss or gradient stops being finite.
TrainResult train(SummarizerModel model, const AttentionConfig& cfg,
                  std::span<const TrainingExample> dataset, const TrainOptions& options,
                  const EpochCallback& on_epoch = {});

}  // namespace relsum
