#include "spsel/spnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "spsel/rng.hpp"

namespace spsel {

namespace {

constexpr double kDivergenceClamp = 1e-8;
constexpr double kProbClamp = 1e-7;

Matrix unit_row_from_seed(std::uint64_t seed, int h) {
  Rng rng(seed);
  Matrix row(1, h);
  for (int j = 0; j < h; ++j) row(0, j) = rng.gaussian();
  const double norm = row.norm();
  if (norm > 0.0) row /= norm;
  return row;
}

}  // namespace

int SpNetParams::row_for(const std::string& token) const {
  const auto it = token_rows.find(token);
  if (it != token_rows.end()) return it->second;
  const int vocab = static_cast<int>(token_rows.size());
  return vocab + static_cast<int>(fnv1a64(token) % static_cast<std::uint64_t>(
                                      std::max(1, unknown_buckets)));
}

SpNetParams make_params(const std::vector<Domain>& vocab_domains, int h,
                        std::uint64_t seed, double tau, LossWeights loss_weights,
                        int unknown_buckets, double layer_init_scale) {
  if (h < 1) throw ValidationError("make_params: h must be >= 1");
  if (tau <= 0.0) throw ValidationError("make_params: tau must be > 0");
  if (unknown_buckets < 1) throw ValidationError("make_params: need >= 1 unknown bucket");

  std::set<std::string> vocab;
  for (const Domain& domain : vocab_domains) {
    for (const LabeledSentence& sentence : domain.sentences) {
      vocab.insert(sentence.tokens.begin(), sentence.tokens.end());
    }
  }

  SpNetParams params;
  params.h = h;
  params.tau = tau;
  params.loss_weights = loss_weights;
  params.unknown_buckets = unknown_buckets;

  int row = 0;
  for (const std::string& token : vocab) params.token_rows[token] = row++;

  const int rows = static_cast<int>(vocab.size()) + unknown_buckets;
  params.token_embeddings.resize(rows, h);
  for (const auto& [token, r] : params.token_rows) {
    params.token_embeddings.row(r) = unit_row_from_seed(mix_seed(fnv1a64(token), seed), h);
  }
  for (int b = 0; b < unknown_buckets; ++b) {
    const std::uint64_t bucket_seed =
        mix_seed(fnv1a64("<unk>") + static_cast<std::uint64_t>(b), seed);
    params.token_embeddings.row(static_cast<int>(vocab.size()) + b) =
        unit_row_from_seed(bucket_seed, h);
  }

  // Small random weights and a positive bias keep some rectifier units live
  // from the first step; exact zeros would gate every layer gradient off.
  Rng layer_rng(mix_seed(seed, fnv1a64("layers")));
  auto init_square = [&](Matrix& m) {
    m.resize(h, h);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < h; ++j) m(i, j) = layer_init_scale * layer_rng.gaussian();
  };
  auto init_bias = [&](RowVector& v) {
    v.resize(h);
    for (int j = 0; j < h; ++j) v(j) = layer_init_scale * layer_rng.uniform();
  };
  init_square(params.shared_weight);
  init_bias(params.shared_bias);
  init_square(params.private_weight);
  init_bias(params.private_bias);
  return params;
}

namespace {

ad::RowTaps sentence_taps(const SpNetParams& params, const LabeledSentence& sentence) {
  ad::RowTaps taps(sentence.tokens.size());
  const int n = static_cast<int>(sentence.tokens.size());
  for (int i = 0; i < n; ++i) {
    taps[static_cast<std::size_t>(i)].emplace_back(params.row_for(sentence.tokens[i]), 1.0);
    if (i > 0) {
      taps[static_cast<std::size_t>(i)].emplace_back(
          params.row_for(sentence.tokens[i - 1]), 0.5);
    }
    if (i + 1 < n) {
      taps[static_cast<std::size_t>(i)].emplace_back(
          params.row_for(sentence.tokens[i + 1]), 0.5);
    }
  }
  return taps;
}

ad::RowTaps set_taps(const SpNetParams& params,
                     const std::vector<LabeledSentence>& sentences) {
  ad::RowTaps taps;
  for (const LabeledSentence& sentence : sentences) {
    ad::RowTaps s = sentence_taps(params, sentence);
    taps.insert(taps.end(), s.begin(), s.end());
  }
  return taps;
}

}  // namespace

Matrix encode(const SpNetParams& params, const LabeledSentence& sentence) {
  const ad::RowTaps taps = sentence_taps(params, sentence);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(taps.size()), params.h);
  for (std::size_t i = 0; i < taps.size(); ++i) {
    for (const auto& [row, weight] : taps[i]) {
      out.row(static_cast<Eigen::Index>(i)) += weight * params.token_embeddings.row(row);
    }
  }
  return out;
}

namespace {

Matrix residual_relu(const Matrix& embedded, const Matrix& weight, const RowVector& bias) {
  Matrix pre = embedded * weight;
  pre.rowwise() += bias;
  return embedded + pre.cwiseMax(0.0);
}

}  // namespace

Matrix shared_forward(const SpNetParams& params, const Matrix& embedded) {
  if (embedded.cols() != params.h) {
    throw ValidationError("shared_forward: width mismatch");
  }
  return residual_relu(embedded, params.shared_weight, params.shared_bias);
}

Matrix private_forward(const SpNetParams& params, const Matrix& embedded) {
  if (embedded.cols() != params.h) {
    throw ValidationError("private_forward: width mismatch");
  }
  return residual_relu(embedded, params.private_weight, params.private_bias);
}

std::vector<std::string> word_classes(const LabeledSentence& sentence) {
  std::vector<std::string> classes;
  classes.reserve(sentence.labels.size());
  for (const std::string& label : sentence.labels) {
    const std::string slot = slot_of(label);
    classes.push_back(slot.empty() ? "O" : slot);
  }
  return classes;
}

EncodedEpisode encode_episode(const SpNetParams& params, const Episode& episode) {
  EncodedEpisode out;

  std::map<std::string, int> class_ids;
  for (const LabeledSentence& sentence : episode.support) {
    for (const std::string& cls : word_classes(sentence)) {
      auto [it, inserted] = class_ids.try_emplace(cls, static_cast<int>(out.class_names.size()));
      if (inserted) out.class_names.push_back(cls);
      out.support_classes.push_back(it->second);
    }
  }
  out.class_count = static_cast<int>(out.class_names.size());

  for (const LabeledSentence& sentence : episode.query) {
    out.query_sentence_sizes.push_back(sentence.tokens.size());
    for (const std::string& cls : word_classes(sentence)) {
      const auto it = class_ids.find(cls);
      out.query_classes.push_back(it == class_ids.end() ? -1 : it->second);
    }
  }

  auto encode_set = [&](const std::vector<LabeledSentence>& sentences) {
    Matrix all(0, params.h);
    for (const LabeledSentence& sentence : sentences) {
      const Matrix e = encode(params, sentence);
      const Eigen::Index offset = all.rows();
      all.conservativeResize(offset + e.rows(), params.h);
      all.bottomRows(e.rows()) = e;
    }
    return all;
  };

  const Matrix support_embedded = encode_set(episode.support);
  out.support_shared = shared_forward(params, support_embedded);
  out.support_private = private_forward(params, support_embedded);
  const Matrix query_embedded = encode_set(episode.query);
  out.query_shared = shared_forward(params, query_embedded);
  return out;
}

// ---- loss graph builders (single source of truth for values + gradients) ----

namespace {

ad::Value scalar_const(ad::Tape& tape, double v, const std::string& name) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return tape.constant(std::move(m), name);
}

ad::Value build_l1(ad::Tape& tape, ad::Value support_shared,
                   const std::vector<int>& classes, double tau) {
  const Eigen::Index n = support_shared.mat().rows();
  int max_class = -1;
  for (int c : classes) max_class = std::max(max_class, c);
  std::vector<int> members(static_cast<std::size_t>(max_class) + 1, 0);
  for (int c : classes) members[static_cast<std::size_t>(c)]++;
  std::vector<int> paired;
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c] >= 2) paired.push_back(static_cast<int>(c));
  }
  if (n < 2 || paired.empty()) {
    return scalar_const(tape, 0.0, "l1_empty");
  }

  ad::Value normalized = ad::row_normalize(support_shared);
  ad::Value sims = ad::matmul(normalized, ad::transpose(normalized));
  ad::Value weights = ad::exp(ad::scale(sims, 1.0 / tau));

  Matrix off_diagonal = Matrix::Ones(n, n);
  off_diagonal.diagonal().setZero();
  ad::Value denominator = ad::masked_sum(weights, off_diagonal);
  ad::Value log_den = ad::log(denominator);

  ad::Value acc = scalar_const(tape, 0.0, "l1_acc");
  for (int c : paired) {
    Matrix mask = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (classes[static_cast<std::size_t>(i)] != c) continue;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i != j && classes[static_cast<std::size_t>(j)] == c) mask(i, j) = 1.0;
      }
    }
    ad::Value numerator = ad::masked_sum(weights, mask);
    acc = ad::add(acc, ad::sub(log_den, ad::log(numerator)));
  }
  return ad::scale(acc, 1.0 / static_cast<double>(paired.size()));
}

ad::Value build_l2(ad::Tape& tape, ad::Value support_private) {
  const Eigen::Index n = support_private.mat().rows();
  ad::Value centered = ad::sub_row_mean(support_private);
  ad::Value divergence = ad::matmul(centered, ad::transpose(centered));
  ad::Value clamped = ad::clamp_min(divergence, kDivergenceClamp);
  (void)tape;
  return ad::scale(ad::sum(ad::log(clamped)), -1.0 / static_cast<double>(n * n));
}

ad::Value build_l3(ad::Tape& tape, ad::Value support_shared, ad::Value support_private,
                   OrthoMode mode) {
  const Eigen::Index n = support_shared.mat().rows();
  (void)tape;
  if (mode == OrthoMode::kPerWordAbsDot) {
    ad::Value dots = ad::row_dots(support_shared, support_private);
    return ad::scale(ad::sum(ad::abs(dots)), 1.0 / static_cast<double>(n));
  }
  ad::Value product = ad::matmul(ad::transpose(support_shared), support_private);
  return ad::scale(ad::sum(ad::hadamard(product, product)), 1.0 / static_cast<double>(n));
}

Matrix class_mean_map(const std::vector<int>& classes, int class_count) {
  Matrix map = Matrix::Zero(class_count, static_cast<Eigen::Index>(classes.size()));
  std::vector<int> members(static_cast<std::size_t>(class_count), 0);
  for (int c : classes) members[static_cast<std::size_t>(c)]++;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const int c = classes[i];
    map(c, static_cast<Eigen::Index>(i)) = 1.0 / static_cast<double>(members[static_cast<std::size_t>(c)]);
  }
  return map;
}

ad::Value build_scores(ad::Tape& tape, ad::Value query_shared, ad::Value protos,
                       SimilarityMode mode) {
  if (mode == SimilarityMode::kCosine) {
    (void)tape;
    return ad::matmul(ad::row_normalize(query_shared),
                      ad::transpose(ad::row_normalize(protos)));
  }
  ad::Value projected = ad::matmul(query_shared, ad::transpose(ad::row_normalize(protos)));
  ad::Value half_norms = ad::scale(ad::transpose(ad::row_norms(protos)), -0.5);
  return ad::add_row(projected, half_norms);
}

ad::Value build_l4(ad::Tape& tape, ad::Value scores, const std::vector<int>& gold,
                   int class_count, SimilarityMode mode) {
  const Eigen::Index n = scores.mat().rows();
  if (n == 0) return scalar_const(tape, 0.0, "l4_empty");

  ad::Value probs =
      mode == SimilarityMode::kCosine
          ? ad::clamp(ad::add_scalar(ad::scale(scores, 0.5), 0.5), kProbClamp,
                      1.0 - kProbClamp)
          : ad::clamp(ad::sigmoid(scores), kProbClamp, 1.0 - kProbClamp);

  Matrix one_hot = Matrix::Zero(n, class_count);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = gold[static_cast<std::size_t>(i)];
    if (c >= 0) one_hot(i, c) = 1.0;
  }
  const Matrix complement = Matrix::Ones(n, class_count) - one_hot;

  ad::Value hit = ad::masked_sum(ad::log(probs), one_hot);
  ad::Value miss = ad::masked_sum(ad::log(ad::add_scalar(ad::scale(probs, -1.0), 1.0)),
                                  complement);
  return ad::scale(ad::add(hit, miss), -1.0 / static_cast<double>(n));
}

struct EpisodeGraph {
  ad::Value table, shared_w, shared_b, private_w, private_b;
  ad::Value l1, l2, l3, l4, total;
};

EpisodeGraph build_episode_graph(ad::Tape& tape, const SpNetParams& params,
                                 const Episode& episode, SimilarityMode mode,
                                 OrthoMode ortho, bool params_trainable) {
  EpisodeGraph g;
  auto leaf = [&](Matrix m, const char* name) {
    return params_trainable ? tape.input(std::move(m), name)
                            : tape.constant(std::move(m), name);
  };
  g.table = leaf(params.token_embeddings, "token_embeddings");
  g.shared_w = leaf(params.shared_weight, "shared_weight");
  g.shared_b = leaf(params.shared_bias, "shared_bias");
  g.private_w = leaf(params.private_weight, "private_weight");
  g.private_b = leaf(params.private_bias, "private_bias");

  std::vector<int> support_classes, query_classes;
  std::vector<std::string> class_names;
  std::map<std::string, int> class_ids;
  for (const LabeledSentence& sentence : episode.support) {
    for (const std::string& cls : word_classes(sentence)) {
      auto [it, inserted] = class_ids.try_emplace(cls, static_cast<int>(class_names.size()));
      if (inserted) class_names.push_back(cls);
      support_classes.push_back(it->second);
    }
  }
  for (const LabeledSentence& sentence : episode.query) {
    for (const std::string& cls : word_classes(sentence)) {
      const auto it = class_ids.find(cls);
      query_classes.push_back(it == class_ids.end() ? -1 : it->second);
    }
  }
  const int class_count = static_cast<int>(class_names.size());

  auto forward = [&](ad::Value embedded, ad::Value weight, ad::Value bias) {
    return ad::add(embedded,
                   ad::relu(ad::add_row(ad::matmul(embedded, weight), bias)));
  };

  ad::Value support_embedded = ad::gather_rows(g.table, set_taps(params, episode.support));
  ad::Value support_shared = forward(support_embedded, g.shared_w, g.shared_b);
  ad::Value support_private = forward(support_embedded, g.private_w, g.private_b);

  g.l1 = build_l1(tape, support_shared, support_classes, params.tau);
  g.l2 = build_l2(tape, support_private);
  g.l3 = build_l3(tape, support_shared, support_private, ortho);

  ad::Value protos = ad::matmul(
      tape.constant(class_mean_map(support_classes, class_count), "class_means"),
      support_shared);

  if (!episode.query.empty()) {
    ad::Value query_embedded = ad::gather_rows(g.table, set_taps(params, episode.query));
    ad::Value query_shared = forward(query_embedded, g.shared_w, g.shared_b);
    ad::Value scores = build_scores(tape, query_shared, protos, mode);
    g.l4 = build_l4(tape, scores, query_classes, class_count, mode);
  } else {
    g.l4 = scalar_const(tape, 0.0, "l4_no_query");
  }

  const LossWeights& w = params.loss_weights;
  g.total = ad::add(ad::add(ad::scale(g.l1, w.alpha), ad::scale(g.l2, w.beta)),
                    ad::add(ad::scale(g.l3, w.gamma), ad::scale(g.l4, w.delta)));
  return g;
}

}  // namespace

double contrastive_loss(const Matrix& support_shared, const std::vector<int>& classes,
                        double tau, int* zero_norm_count) {
  if (tau <= 0.0) throw ValidationError("contrastive_loss: tau must be > 0");
  if (static_cast<std::size_t>(support_shared.rows()) != classes.size()) {
    throw ValidationError("contrastive_loss: class ids do not match word count");
  }
  ad::Tape tape;
  ad::Value value = build_l1(tape, tape.constant(support_shared, "support_shared"),
                             classes, tau);
  if (zero_norm_count) *zero_norm_count += tape.zero_norm_rows();
  return value.scalar();
}

double divergence_loss(const Matrix& support_private) {
  if (support_private.rows() < 1) {
    throw ValidationError("divergence_loss: empty support");
  }
  ad::Tape tape;
  return build_l2(tape, tape.constant(support_private, "support_private")).scalar();
}

double orthogonality_loss(const Matrix& support_shared, const Matrix& support_private,
                          OrthoMode mode) {
  if (support_shared.rows() != support_private.rows() ||
      support_shared.cols() != support_private.cols()) {
    throw ValidationError("orthogonality_loss: shape mismatch");
  }
  ad::Tape tape;
  return build_l3(tape, tape.constant(support_shared, "support_shared"),
                  tape.constant(support_private, "support_private"), mode)
      .scalar();
}

Matrix prototypes(const Matrix& support_shared, const std::vector<int>& classes,
                  int class_count) {
  if (static_cast<std::size_t>(support_shared.rows()) != classes.size()) {
    throw ValidationError("prototypes: class ids do not match word count");
  }
  std::vector<int> members(static_cast<std::size_t>(class_count), 0);
  for (int c : classes) {
    if (c < 0 || c >= class_count) throw ValidationError("prototypes: class id out of range");
    members[static_cast<std::size_t>(c)]++;
  }
  for (int c = 0; c < class_count; ++c) {
    if (members[static_cast<std::size_t>(c)] == 0) {
      throw ValidationError("prototypes: class " + std::to_string(c) +
                            " has no support words");
    }
  }
  return class_mean_map(classes, class_count) * support_shared;
}

Prediction predict(const Matrix& query_shared, const Matrix& protos, SimilarityMode mode,
                   int* zero_norm_count) {
  if (protos.rows() == 0) throw ValidationError("predict: empty prototype set");
  ad::Tape tape;
  ad::Value scores = build_scores(tape, tape.constant(query_shared, "query_shared"),
                                  tape.constant(protos, "prototypes"), mode);
  if (zero_norm_count) *zero_norm_count += tape.zero_norm_rows();

  Prediction out;
  out.scores = scores.mat();
  out.classes.resize(static_cast<std::size_t>(out.scores.rows()));
  for (Eigen::Index i = 0; i < out.scores.rows(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < out.scores.cols(); ++c) {
      if (out.scores(i, c) > out.scores(i, best)) best = static_cast<int>(c);
    }
    out.classes[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

double bce_loss(const Matrix& scores, const std::vector<int>& gold, int class_count,
                SimilarityMode mode) {
  if (static_cast<std::size_t>(scores.rows()) != gold.size()) {
    throw ValidationError("bce_loss: gold ids do not match word count");
  }
  if (scores.cols() != class_count) {
    throw ValidationError("bce_loss: score columns do not match class count");
  }
  if (!scores.allFinite()) throw ValidationError("bce_loss: non-finite scores");
  ad::Tape tape;
  return build_l4(tape, tape.constant(scores, "scores"), gold, class_count, mode).scalar();
}

double total_loss(double l1, double l2, double l3, double l4, const LossWeights& w) {
  return w.alpha * l1 + w.beta * l2 + w.gamma * l3 + w.delta * l4;
}

EpisodeLosses episode_losses(const SpNetParams& params, const Episode& episode,
                             SimilarityMode mode, OrthoMode ortho) {
  ad::Tape tape;
  const EpisodeGraph g = build_episode_graph(tape, params, episode, mode, ortho, false);
  EpisodeLosses out;
  out.l1 = g.l1.scalar();
  out.l2 = g.l2.scalar();
  out.l3 = g.l3.scalar();
  out.l4 = g.l4.scalar();
  out.total = g.total.scalar();
  out.zero_norm_warnings = tape.zero_norm_rows();
  return out;
}

std::pair<EpisodeLosses, Gradients> backward(const SpNetParams& params,
                                             const Episode& episode, SimilarityMode mode,
                                             OrthoMode ortho) {
  ad::Tape tape;
  const EpisodeGraph g = build_episode_graph(tape, params, episode, mode, ortho, true);
  tape.backward(g.total);

  EpisodeLosses losses;
  losses.l1 = g.l1.scalar();
  losses.l2 = g.l2.scalar();
  losses.l3 = g.l3.scalar();
  losses.l4 = g.l4.scalar();
  losses.total = g.total.scalar();
  losses.zero_norm_warnings = tape.zero_norm_rows();

  Gradients grads;
  grads.token_embeddings = tape.grad(g.table);
  grads.shared_weight = tape.grad(g.shared_w);
  grads.shared_bias = tape.grad(g.shared_b).row(0);
  grads.private_weight = tape.grad(g.private_w);
  grads.private_bias = tape.grad(g.private_b).row(0);
  return {losses, grads};
}

// ---- checkpoints ----

namespace {

void write_tensor(std::ofstream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  }
}

Matrix read_tensor(std::ifstream& in, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v = 0;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      m(i, j) = v;
    }
  }
  if (!in) throw ValidationError("checkpoint: truncated tensor data");
  return m;
}

}  // namespace

void save_checkpoint(const SpNetParams& params, const std::string& base_path) {
  const std::string bin_path = base_path + ".bin";
  const std::string manifest_path = base_path + ".json";

  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw ValidationError("cannot write checkpoint: " + bin_path);

  nlohmann::json manifest;
  manifest["h"] = params.h;
  manifest["tau"] = params.tau;
  manifest["loss_weights"] = {params.loss_weights.alpha, params.loss_weights.beta,
                              params.loss_weights.gamma, params.loss_weights.delta};
  manifest["unknown_buckets"] = params.unknown_buckets;

  nlohmann::json tensors = nlohmann::json::array();
  std::uint64_t offset = 0;
  auto add = [&](const std::string& name, const Matrix& m) {
    tensors.push_back({{"name", name},
                       {"rows", m.rows()},
                       {"cols", m.cols()},
                       {"offset_bytes", offset}});
    offset += static_cast<std::uint64_t>(m.size()) * sizeof(double);
    write_tensor(bin, m);
  };
  add("token_embeddings", params.token_embeddings);
  add("shared_weight", params.shared_weight);
  add("shared_bias", params.shared_bias);
  add("private_weight", params.private_weight);
  add("private_bias", params.private_bias);
  manifest["tensors"] = tensors;
  manifest["token_rows"] = params.token_rows;

  std::ofstream mf(manifest_path);
  if (!mf) throw ValidationError("cannot write checkpoint manifest: " + manifest_path);
  mf << manifest.dump(2) << "\n";
}

SpNetParams load_checkpoint(const std::string& base_path) {
  const std::string bin_path = base_path + ".bin";
  const std::string manifest_path = base_path + ".json";

  std::ifstream mf(manifest_path);
  if (!mf) throw ValidationError("cannot open checkpoint manifest: " + manifest_path);
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed checkpoint manifest: " + std::string(e.what()));
  }

  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw ValidationError("cannot open checkpoint: " + bin_path);

  SpNetParams params;
  try {
    params.h = manifest.at("h").get<int>();
    params.tau = manifest.at("tau").get<double>();
    const auto lw = manifest.at("loss_weights").get<std::vector<double>>();
    if (lw.size() != 4) throw ValidationError("checkpoint: loss_weights must have 4 entries");
    params.loss_weights = {lw[0], lw[1], lw[2], lw[3]};
    params.unknown_buckets = manifest.at("unknown_buckets").get<int>();
    params.token_rows = manifest.at("token_rows").get<std::map<std::string, int>>();

    std::map<std::string, Matrix> tensors;
    for (const auto& t : manifest.at("tensors")) {
      tensors[t.at("name").get<std::string>()] =
          read_tensor(bin, t.at("rows").get<Eigen::Index>(), t.at("cols").get<Eigen::Index>());
    }
    params.token_embeddings = tensors.at("token_embeddings");
    params.shared_weight = tensors.at("shared_weight");
    params.shared_bias = tensors.at("shared_bias").row(0);
    params.private_weight = tensors.at("private_weight");
    params.private_bias = tensors.at("private_bias").row(0);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed checkpoint manifest: " + std::string(e.what()));
  }
  return params;
}

}  // namespace spsel
