#include "spsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace spsel {

double combined_score(const CombinationWeights& weights, const SimilarityTriple& t) {
  return weights.theta[0] * t.tvc + weights.theta[1] * t.tis + weights.theta[2] * t.lo;
}

std::array<double, 3> project_to_simplex(std::array<double, 3> v) {
  // Sort descending, find the largest k with u_k + (1 - sum u_1..k)/k > 0.
  std::array<double, 3> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (int k = 0; k < 3; ++k) {
    cumulative += u[k];
    const double candidate = (1.0 - cumulative) / (k + 1);
    if (u[k] + candidate > 0.0) shift = candidate;
  }
  for (double& x : v) x = std::max(0.0, x + shift);
  return v;
}

namespace {

struct TargetSlot {
  std::string name;
  double w = 1.0;
  double b = 0.0;
};

void check_records(const std::vector<SweepRecord>& records) {
  if (records.empty()) {
    throw ValidationError("fit_weights: no records");
  }
  std::map<std::string, int> per_target;
  for (const SweepRecord& r : records) {
    const double vals[4] = {r.triple.tvc, r.triple.tis, r.triple.lo, r.performance};
    for (double v : vals) {
      if (!std::isfinite(v)) {
        throw ValidationError("fit_weights: non-finite value in record for target \"" +
                              r.target + "\"");
      }
    }
    per_target[r.target]++;
  }
  for (const auto& [target, n] : per_target) {
    if (n < 4) {
      throw ValidationError("fit_weights: target \"" + target + "\" has only " +
                            std::to_string(n) + " records (need >= 4)");
    }
  }
}

}  // namespace

FitResult fit_weights(const std::vector<SweepRecord>& records, const FitConfig& config) {
  check_records(records);

  std::vector<TargetSlot> targets;
  std::map<std::string, int> target_index;
  std::vector<int> record_target(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, inserted] = target_index.try_emplace(records[i].target,
                                                   static_cast<int>(targets.size()));
    if (inserted) targets.push_back({records[i].target, 1.0, 0.0});
    record_target[i] = it->second;
  }

  std::array<double, 3> theta{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const double inv_n = 1.0 / static_cast<double>(records.size());

  auto objective = [&] {
    double total = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const TargetSlot& t = targets[static_cast<std::size_t>(record_target[i])];
      const SimilarityTriple& s = records[i].triple;
      const double c = theta[0] * s.tvc + theta[1] * s.tis + theta[2] * s.lo;
      const double err = t.w * c + t.b - records[i].performance;
      total += err * err;
    }
    return total * inv_n;
  };

  FitResult result;
  result.loss_log.reserve(static_cast<std::size_t>(config.iterations) + 1);
  result.loss_log.push_back(objective());

  for (int iter = 0; iter < config.iterations; ++iter) {
    std::array<double, 3> grad_theta{0.0, 0.0, 0.0};
    std::vector<double> grad_w(targets.size(), 0.0);
    std::vector<double> grad_b(targets.size(), 0.0);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const int ti = record_target[i];
      const TargetSlot& t = targets[static_cast<std::size_t>(ti)];
      const SimilarityTriple& s = records[i].triple;
      const double c = theta[0] * s.tvc + theta[1] * s.tis + theta[2] * s.lo;
      const double err = 2.0 * inv_n * (t.w * c + t.b - records[i].performance);
      grad_theta[0] += err * t.w * s.tvc;
      grad_theta[1] += err * t.w * s.tis;
      grad_theta[2] += err * t.w * s.lo;
      grad_w[static_cast<std::size_t>(ti)] += err * c;
      grad_b[static_cast<std::size_t>(ti)] += err;
    }
    for (int j = 0; j < 3; ++j) theta[j] -= config.step * grad_theta[j];
    theta = project_to_simplex(theta);
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      targets[ti].w = std::max(config.min_w, targets[ti].w - config.step * grad_w[ti]);
      targets[ti].b = std::max(0.0, targets[ti].b - config.step * grad_b[ti]);
    }
    result.loss_log.push_back(objective());
  }

  result.weights.theta = theta;
  for (const TargetSlot& t : targets) {
    result.weights.per_target_fit[t.name] = LinearFit{t.w, t.b};
  }
  result.weights.residual = result.loss_log.back();
  return result;
}

std::map<std::string, CombinationWeights> fit_weights_per_target(
    const std::vector<SweepRecord>& records, const FitConfig& config) {
  std::set<std::string> targets;
  for (const SweepRecord& r : records) targets.insert(r.target);
  if (targets.size() < 2) {
    throw ValidationError(
        "fit_weights_per_target: needs records from at least 2 targets");
  }
  std::map<std::string, CombinationWeights> out;
  for (const std::string& held_out : targets) {
    std::vector<SweepRecord> rest;
    for (const SweepRecord& r : records) {
      if (r.target != held_out) rest.push_back(r);
    }
    out[held_out] = fit_weights(rest, config).weights;
  }
  return out;
}

const Candidate& select_combination(const std::vector<Candidate>& candidates,
                                    const CombinationWeights& weights) {
  if (candidates.empty()) {
    throw ValidationError("select_combination: empty candidate list");
  }
  const Candidate* best = &candidates.front();
  double best_score = combined_score(weights, best->triple);
  for (const Candidate& c : candidates) {
    const double score = combined_score(weights, c.triple);
    if (score > best_score ||
        (score == best_score &&
         (c.combination.size() < best->combination.size() ||
          (c.combination.size() == best->combination.size() &&
           c.combination < best->combination)))) {
      best = &c;
      best_score = score;
    }
  }
  return *best;
}

std::vector<Candidate> enumerate_candidates(const std::vector<Domain>& sources,
                                            const Domain& target,
                                            const std::vector<Domain>& universe,
                                            LabelPolicy policy) {
  const std::size_t m = sources.size();
  if (m < 1 || m > 20) {
    throw ValidationError("enumerate_candidates: need between 1 and 20 sources, got " +
                          std::to_string(m));
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sources[a].name < sources[b].name;
  });

  TfIdfStats stats(universe);
  const TfIdfVector target_vec = stats.vector_for(target);

  std::vector<Candidate> candidates;
  candidates.reserve((1u << m) - 1);
  // Subsets grouped by size, lexicographic within a size.
  for (std::size_t size = 1; size <= m; ++size) {
    std::vector<std::size_t> pick(size);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
      std::vector<Domain> members;
      Candidate candidate;
      for (std::size_t p : pick) {
        members.push_back(sources[order[p]]);
        candidate.combination.push_back(sources[order[p]].name);
      }
      const Domain merged = merge_domains(members, join_combination(candidate.combination));
      candidate.triple.source_name = merged.name;
      candidate.triple.target_name = target.name;
      candidate.triple.tvc = tvc(merged, target);
      candidate.triple.tis = TfIdfStats::cosine(stats.vector_for(merged), target_vec);
      candidate.triple.lo = lo(merged, target, policy);
      candidates.push_back(std::move(candidate));

      // next combination of indices
      std::size_t i = size;
      while (i > 0 && pick[i - 1] == m - size + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return candidates;
}

std::string join_combination(const std::vector<std::string>& combination) {
  std::string out;
  for (std::size_t i = 0; i < combination.size(); ++i) {
    if (i) out += '+';
    out += combination[i];
  }
  return out;
}

std::vector<std::string> split_combination(const std::string& joined) {
  std::vector<std::string> parts;
  std::stringstream ss(joined);
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

void save_weights_json(const CombinationWeights& weights, const std::string& path) {
  nlohmann::json obj;
  obj["theta"] = weights.theta;
  nlohmann::json fits = nlohmann::json::object();
  for (const auto& [target, fit] : weights.per_target_fit) {
    fits[target] = {{"w", fit.w}, {"b", fit.b}};
  }
  obj["fits"] = fits;
  obj["residual"] = weights.residual;
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot write weights file: " + path);
  }
  out << obj.dump(2) << "\n";
}

CombinationWeights load_weights_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open weights file: " + path);
  }
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed weights file " + path + ": " + e.what());
  }
  CombinationWeights weights;
  try {
    const auto theta = obj.at("theta").get<std::vector<double>>();
    if (theta.size() != 3) {
      throw ValidationError("weights file " + path + ": theta must have 3 entries");
    }
    std::copy(theta.begin(), theta.end(), weights.theta.begin());
    for (const auto& [target, fit] : obj.at("fits").items()) {
      weights.per_target_fit[target] =
          LinearFit{fit.at("w").get<double>(), fit.at("b").get<double>()};
    }
    weights.residual = obj.value("residual", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed weights file " + path + ": " + e.what());
  }
  return weights;
}

}  // namespace spsel
