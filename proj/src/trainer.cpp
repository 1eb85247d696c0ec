#include "spsel/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "spsel/rng.hpp"

namespace spsel {

void TrainConfig::validate() const {
  // 0 is allowed so no-op training runs stay expressible.
  if (learning_rate < 0.0) throw ValidationError("config: learning_rate must be >= 0");
  if (weight_decay < 0.0) throw ValidationError("config: weight_decay must be >= 0");
  if (epochs < 1) throw ValidationError("config: epochs must be >= 1");
  if (seeds.empty()) throw ValidationError("config: seeds must be non-empty");
  if (tau <= 0.0) throw ValidationError("config: tau must be > 0");
  if (k_shot < 1) throw ValidationError("config: k_shot must be >= 1");
  if (hidden < 1) throw ValidationError("config: hidden must be >= 1");
  if (train_episodes < 1) throw ValidationError("config: train_episodes must be >= 1");
  if (eval_episodes < 1) throw ValidationError("config: eval_episodes must be >= 1");
  const double lw[4] = {loss_weights.alpha, loss_weights.beta, loss_weights.gamma,
                        loss_weights.delta};
  for (double w : lw) {
    if (w < 0.0) throw ValidationError("config: loss weights must be >= 0");
  }
}

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct Moments {
  Matrix m, v;
  explicit Moments(const Matrix& like)
      : m(Matrix::Zero(like.rows(), like.cols())),
        v(Matrix::Zero(like.rows(), like.cols())) {}
};

void adam_update(Matrix& param, Moments& moments, const Matrix& grad, int step,
                 const TrainConfig& config) {
  moments.m = kAdamBeta1 * moments.m + (1.0 - kAdamBeta1) * grad;
  moments.v = kAdamBeta2 * moments.v + (1.0 - kAdamBeta2) * grad.cwiseProduct(grad);
  const double correction1 = 1.0 - std::pow(kAdamBeta1, step);
  const double correction2 = 1.0 - std::pow(kAdamBeta2, step);
  const Matrix m_hat = moments.m / correction1;
  const Matrix v_hat = moments.v / correction2;
  param -= config.learning_rate *
           (m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + kAdamEps).matrix()) +
            config.weight_decay * param);
}

}  // namespace

TrainResult train(SpNetParams params, const std::vector<Episode>& episodes,
                  const TrainConfig& config) {
  config.validate();
  if (episodes.empty()) throw ValidationError("train: no episodes");

  Moments table_m(params.token_embeddings);
  Moments ws_m(params.shared_weight);
  Moments bs_m(params.shared_bias);
  Moments wp_m(params.private_weight);
  Moments bp_m(params.private_bias);

  TrainResult result;
  result.loss_log.reserve(static_cast<std::size_t>(config.epochs) * episodes.size());

  int step = 0;
  bool stop = false;
  for (int epoch = 0; epoch < config.epochs && !stop; ++epoch) {
    for (std::size_t e = 0; e < episodes.size() && !stop; ++e) {
      EpisodeLosses losses;
      Gradients grads;
      try {
        std::tie(losses, grads) = backward(params, episodes[e], config.mode, config.ortho);
      } catch (const std::exception& err) {
        throw std::runtime_error("train: episode " + std::to_string(e) + ", epoch " +
                                 std::to_string(epoch) + ": " + err.what());
      }
      result.loss_log.push_back(losses.total);

      ++step;
      adam_update(params.token_embeddings, table_m, grads.token_embeddings, step, config);
      adam_update(params.shared_weight, ws_m, grads.shared_weight, step, config);
      adam_update(params.private_weight, wp_m, grads.private_weight, step, config);
      Matrix bs = params.shared_bias, bs_g = grads.shared_bias;
      adam_update(bs, bs_m, bs_g, step, config);
      params.shared_bias = bs.row(0);
      Matrix bp = params.private_bias, bp_g = grads.private_bias;
      adam_update(bp, bp_m, bp_g, step, config);
      params.private_bias = bp.row(0);

      const int w = config.early_stop_window;
      if (static_cast<int>(result.loss_log.size()) >= 2 * w) {
        const auto& log = result.loss_log;
        const std::size_t n = log.size();
        const double recent =
            std::accumulate(log.end() - w, log.end(), 0.0) / w;
        const double previous =
            std::accumulate(log.begin() + static_cast<std::ptrdiff_t>(n) - 2 * w,
                            log.end() - w, 0.0) /
            w;
        if (previous - recent < config.early_stop_delta) stop = true;
      }
    }
  }

  result.params = std::move(params);
  return result;
}

std::vector<Span> extract_spans(const std::vector<std::string>& bio_labels) {
  std::vector<Span> spans;
  std::string open_slot;
  int open_begin = 0;
  auto close = [&](int end) {
    if (!open_slot.empty()) {
      spans.push_back(Span{open_slot, open_begin, end});
      open_slot.clear();
    }
  };
  for (int i = 0; i < static_cast<int>(bio_labels.size()); ++i) {
    const std::string& label = bio_labels[static_cast<std::size_t>(i)];
    const std::string slot = slot_of(label);
    if (label.rfind("B-", 0) == 0) {
      close(i);
      open_slot = slot;
      open_begin = i;
    } else if (label.rfind("I-", 0) == 0) {
      if (slot != open_slot) {  // stray continuation starts a fresh span
        close(i);
        open_slot = slot;
        open_begin = i;
      }
    } else {
      close(i);
    }
  }
  close(static_cast<int>(bio_labels.size()));
  return spans;
}

std::vector<std::string> decode_bio(const std::vector<std::string>& classes) {
  std::vector<std::string> bio;
  bio.reserve(classes.size());
  std::string previous = "O";
  for (const std::string& cls : classes) {
    if (cls == "O" || cls.empty()) {
      bio.push_back("O");
    } else if (cls == previous) {
      bio.push_back("I-" + cls);
    } else {
      bio.push_back("B-" + cls);
    }
    previous = cls;
  }
  return bio;
}

namespace {

struct MicroCounts {
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

void score_sentence(const std::vector<Span>& predicted, const std::vector<Span>& gold,
                    MicroCounts& counts) {
  counts.predicted += predicted.size();
  counts.gold += gold.size();
  std::vector<bool> used(gold.size(), false);
  for (const Span& p : predicted) {
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (!used[i] && gold[i] == p) {
        used[i] = true;
        ++counts.matched;
        break;
      }
    }
  }
}

double safe_ratio(std::size_t a, std::size_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

}  // namespace

EvalResult evaluate(const SpNetParams& params, const std::vector<Episode>& episodes,
                    const TrainConfig& config) {
  if (!params.token_embeddings.allFinite()) {
    throw ValidationError("evaluate: non-finite parameters");
  }
  MicroCounts counts;
  for (const Episode& episode : episodes) {
    const EncodedEpisode encoded = encode_episode(params, episode);
    if (encoded.class_count == 0) continue;
    const Matrix protos =
        prototypes(encoded.support_shared, encoded.support_classes, encoded.class_count);

    std::size_t word = 0;
    for (std::size_t s = 0; s < episode.query.size(); ++s) {
      const std::size_t n = encoded.query_sentence_sizes[s];
      const Matrix rows = encoded.query_shared.middleRows(
          static_cast<Eigen::Index>(word), static_cast<Eigen::Index>(n));
      const Prediction prediction = predict(rows, protos, config.mode);
      std::vector<std::string> classes(n);
      for (std::size_t i = 0; i < n; ++i) {
        classes[i] = encoded.class_names[static_cast<std::size_t>(prediction.classes[i])];
      }
      score_sentence(extract_spans(decode_bio(classes)),
                     extract_spans(episode.query[s].labels), counts);
      word += n;
    }
  }

  EvalResult result;
  result.precision = safe_ratio(counts.matched, counts.predicted);
  result.recall = safe_ratio(counts.matched, counts.gold);
  result.f1 = (result.precision + result.recall) > 0.0
                  ? 2.0 * result.precision * result.recall /
                        (result.precision + result.recall)
                  : 0.0;
  result.per_seed_f1 = {result.f1};
  result.mean_f1 = result.f1;
  result.stddev_f1 = 0.0;
  return result;
}

EvalResult run_experiment(const std::vector<Domain>& sources, const Domain& target,
                          const TrainConfig& config) {
  config.validate();
  if (sources.empty()) throw ValidationError("run_experiment: no source domains");

  const Domain merged = merge_domains(sources, "train");
  std::vector<Domain> vocab_domains = sources;
  vocab_domains.push_back(target);

  EvalResult aggregate;
  double precision_sum = 0.0, recall_sum = 0.0;
  for (const std::uint64_t seed : config.seeds) {
    SpNetParams params =
        make_params(vocab_domains, config.hidden, seed, config.tau, config.loss_weights,
                    config.unknown_buckets);
    const std::vector<Episode> train_episodes = build_episodes(
        merged, config.k_shot, config.train_episodes, seed, config.query_size);
    const std::vector<Episode> eval_episodes =
        build_episodes(target, config.k_shot, config.eval_episodes,
                       mix_seed(seed, fnv1a64("eval")), config.query_size);

    const TrainResult trained = train(std::move(params), train_episodes, config);
    const EvalResult seed_result = evaluate(trained.params, eval_episodes, config);
    aggregate.per_seed_f1.push_back(seed_result.f1);
    precision_sum += seed_result.precision;
    recall_sum += seed_result.recall;
  }

  const std::size_t n = aggregate.per_seed_f1.size();
  aggregate.mean_f1 =
      std::accumulate(aggregate.per_seed_f1.begin(), aggregate.per_seed_f1.end(), 0.0) /
      static_cast<double>(n);
  double variance = 0.0;
  for (double f1 : aggregate.per_seed_f1) {
    variance += (f1 - aggregate.mean_f1) * (f1 - aggregate.mean_f1);
  }
  aggregate.stddev_f1 = n > 1 ? std::sqrt(variance / static_cast<double>(n - 1)) : 0.0;
  aggregate.f1 = aggregate.mean_f1;
  aggregate.precision = precision_sum / static_cast<double>(n);
  aggregate.recall = recall_sum / static_cast<double>(n);
  return aggregate;
}

void save_loss_log_csv(const std::vector<double>& loss_log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write loss log: " + path);
  out << "step,loss\n";
  char buffer[64];
  for (std::size_t i = 0; i < loss_log.size(); ++i) {
    std::snprintf(buffer, sizeof(buffer), "%zu,%.17g\n", i, loss_log[i]);
    out << buffer;
  }
}

}  // namespace spsel
