#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spsel/autodiff.hpp"
#include "spsel/corpus.hpp"
#include "spsel/types.hpp"

namespace spsel {

enum class SimilarityMode { kCosine, kVpb };

// Orthogonality penalty variant: per-word absolute dot product (default) or
// the squared Frobenius norm of the stacked shared/private product.
enum class OrthoMode { kPerWordAbsDot, kFrobenius };

struct LossWeights {
  double alpha = 0.2;   // contrastive
  double beta = 0.1;    // divergence
  double gamma = 0.2;   // orthogonality
  double delta = 0.5;   // classification
};

// Trainable state: a token-embedding table standing in for the encoder plus
// the shared/private residual layers.
struct SpNetParams {
  Matrix token_embeddings;  // (|vocab| + unknown buckets) x h
  Matrix shared_weight;     // h x h
  RowVector shared_bias;    // 1 x h
  Matrix private_weight;    // h x h
  RowVector private_bias;   // 1 x h
  double tau = 0.5;
  LossWeights loss_weights;
  int h = 0;

  std::map<std::string, int> token_rows;
  int unknown_buckets = 16;

  // Known tokens map to their own row; unknown tokens hash into the trailing
  // bucket rows.
  int row_for(const std::string& token) const;
};

// Builds a parameter set whose table covers the verbatim tokens of the given
// domains. Rows are seeded from a hash of the token string (mixed with seed)
// and scaled to unit norm; layer weights start at zero so both layers begin
// as the identity.
SpNetParams make_params(const std::vector<Domain>& vocab_domains, int h,
                        std::uint64_t seed, double tau = 0.5,
                        LossWeights loss_weights = {}, int unknown_buckets = 16,
                        double layer_init_scale = 0.05);

// E_i = emb(x_i) + 0.5 * (emb(x_{i-1}) + emb(x_{i+1})), zero beyond bounds.
Matrix encode(const SpNetParams& params, const LabeledSentence& sentence);

// E + relu(E * W_s + b_s), applied row-wise.
Matrix shared_forward(const SpNetParams& params, const Matrix& embedded);
Matrix private_forward(const SpNetParams& params, const Matrix& embedded);

// Word-level view of an episode: per-word shared/private features plus class
// ids. A query word whose class is absent from support carries id -1.
struct EncodedEpisode {
  Matrix support_shared;
  Matrix support_private;
  Matrix query_shared;
  std::vector<int> support_classes;
  std::vector<int> query_classes;
  std::vector<std::string> class_names;  // first-appearance order over support
  std::vector<std::size_t> query_sentence_sizes;
  int class_count = 0;
};

EncodedEpisode encode_episode(const SpNetParams& params, const Episode& episode);

// Word-level class sequence of a sentence: slot name or "O" per word.
std::vector<std::string> word_classes(const LabeledSentence& sentence);

// Supervised contrastive loss over support shared features (temperature tau,
// ordered pairs, self-pairs excluded). Classes with fewer than two support
// words carry no pair and are skipped from the class mean. Zero-norm rows
// enter the cosine as similarity 0 and bump *zero_norm_count.
double contrastive_loss(const Matrix& support_shared, const std::vector<int>& classes,
                        double tau, int* zero_norm_count = nullptr);

// Mean of -log(max(D_ij, 1e-8)) over all centered private pairs, negated:
// spread-out private features push the loss down.
double divergence_loss(const Matrix& support_private);

double orthogonality_loss(const Matrix& support_shared, const Matrix& support_private,
                          OrthoMode mode = OrthoMode::kPerWordAbsDot);

// Per-class mean of the shared features; one row per class id.
Matrix prototypes(const Matrix& support_shared, const std::vector<int>& classes,
                  int class_count);

struct Prediction {
  Matrix scores;             // words x classes
  std::vector<int> classes;  // argmax, ties to the earliest class
};

Prediction predict(const Matrix& query_shared, const Matrix& protos,
                   SimilarityMode mode, int* zero_norm_count = nullptr);

// Binary cross-entropy over per-class scores. Cosine scores squash through
// (p+1)/2, vpb scores through the logistic; both clamp to [1e-7, 1-1e-7].
// gold ids of -1 mean an all-zero one-hot row.
double bce_loss(const Matrix& scores, const std::vector<int>& gold, int class_count,
                SimilarityMode mode);

double total_loss(double l1, double l2, double l3, double l4,
                  const LossWeights& weights);

struct EpisodeLosses {
  double l1 = 0, l2 = 0, l3 = 0, l4 = 0, total = 0;
  int zero_norm_warnings = 0;
};

struct Gradients {
  Matrix token_embeddings;
  Matrix shared_weight;
  RowVector shared_bias;
  Matrix private_weight;
  RowVector private_bias;
};

EpisodeLosses episode_losses(const SpNetParams& params, const Episode& episode,
                             SimilarityMode mode = SimilarityMode::kCosine,
                             OrthoMode ortho = OrthoMode::kPerWordAbsDot);

// Exact gradients of the weighted total loss with respect to every parameter
// tensor, by reverse-mode differentiation of the episode graph.
std::pair<EpisodeLosses, Gradients> backward(const SpNetParams& params,
                                             const Episode& episode,
                                             SimilarityMode mode = SimilarityMode::kCosine,
                                             OrthoMode ortho = OrthoMode::kPerWordAbsDot);

// Checkpoints: <base>.bin holds row-major 64-bit floats; <base>.json is the
// manifest (tensor names/shapes/offsets, scalars, token-row map).
void save_checkpoint(const SpNetParams& params, const std::string& base_path);
SpNetParams load_checkpoint(const std::string& base_path);

}  // namespace spsel
