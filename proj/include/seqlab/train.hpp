#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "seqlab/batch.hpp"
#include "seqlab/config.hpp"
#include "seqlab/corpus.hpp"
#include "seqlab/embeddings.hpp"
#include "seqlab/model.hpp"

namespace seqlab {

// eta_t = eta0 / (1 + rho * (t - 1)), epochs counted from 1.
double lr_for_epoch(double eta0, double rho, std::size_t epoch);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;

  AdamState() = default;
  explicit AdamState(std::span<Param* const> params);
};

// Bias-corrected Adam update of every trainable tensor from its grad.
void adam_step(AdamState& state, std::span<Param* const> params, double lr);

struct EpochRecord {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;  // mean of batch losses
  double dev_metric = 0.0;
  std::size_t optimizer_steps = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based; 0 when no epoch ran
};

struct TrainResult {
  Model model;  // parameters of the best dev epoch
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

double evaluate_metric(const Model& model, const EmbeddingTable* table,
                       std::span<const Sentence> sentences, EarlyStopMetric metric);

// Both corpora must share one label vocabulary (see remap_labels).
TrainResult run_training(const TrainConfig& config, const Corpus& train, const Corpus& dev,
                         const EmbeddingTable* table, const EpochCallback& on_epoch = {});

}  // namespace seqlab
