#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spsel/corpus.hpp"
#include "spsel/spnet.hpp"
#include "spsel/types.hpp"

namespace spsel {

struct TrainConfig {
  double learning_rate = 1e-3;  // desk-scale default; 2e-5 suits a large encoder
  double weight_decay = 5e-5;
  int epochs = 6;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  SimilarityMode mode = SimilarityMode::kCosine;
  LossWeights loss_weights;
  double tau = 0.5;
  OrthoMode ortho = OrthoMode::kPerWordAbsDot;

  int k_shot = 1;
  int hidden = 16;
  int train_episodes = 16;
  int eval_episodes = 6;
  int query_size = 16;
  int unknown_buckets = 16;

  // "train until the loss converges": fixed epoch budget plus an early stop
  // when the 50-step moving average improves by less than 1e-5.
  int early_stop_window = 50;
  double early_stop_delta = 1e-5;

  void validate() const;
};

struct TrainResult {
  SpNetParams params;
  std::vector<double> loss_log;  // total loss per optimizer step
};

// Episode-wise optimization with adaptive moment estimation (beta1 = 0.9,
// beta2 = 0.999, eps = 1e-8) and decoupled weight decay. Deterministic for a
// fixed initial state and episode list. Throws naming the episode index if
// the loss turns non-finite.
TrainResult train(SpNetParams params, const std::vector<Episode>& episodes,
                  const TrainConfig& config);

struct Span {
  std::string slot;
  int begin = 0;  // inclusive
  int end = 0;    // exclusive

  auto operator<=>(const Span&) const = default;
};

// Exact-match spans of a valid BIO sequence.
std::vector<Span> extract_spans(const std::vector<std::string>& bio_labels);

// Word classes ("O" or slot name) back to BIO tags: consecutive identical
// slots merge into one span.
std::vector<std::string> decode_bio(const std::vector<std::string>& classes);

struct EvalResult {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::vector<double> per_seed_f1;
  double mean_f1 = 0.0;
  double stddev_f1 = 0.0;  // sample standard deviation across seeds
};

// Micro-averaged span precision/recall/F1 of the model over query sentences,
// prototypes taken from each episode's own support set.
EvalResult evaluate(const SpNetParams& params, const std::vector<Episode>& episodes,
                    const TrainConfig& config);

// Trains on episodes sampled from the merged sources and evaluates on target
// episodes, once per seed; reports per-seed and aggregate F1.
EvalResult run_experiment(const std::vector<Domain>& sources, const Domain& target,
                          const TrainConfig& config);

void save_loss_log_csv(const std::vector<double>& loss_log, const std::string& path);

}  // namespace spsel
