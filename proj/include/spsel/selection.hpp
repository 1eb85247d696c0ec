#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "spsel/corpus.hpp"
#include "spsel/similarity.hpp"
#include "spsel/types.hpp"

namespace spsel {

// One observed (similarity, performance) pair: a merged source combination
// scored against one target and the span F1 it achieved.
struct SweepRecord {
  SimilarityTriple triple;
  double performance = 0.0;
  std::vector<std::string> combination;  // sorted source names, duplicate-free
  std::string target;
};

struct LinearFit {
  double w = 1.0;
  double b = 0.0;
};

// Combination weights on the unit simplex plus the per-target linear map
// from combined score to predicted performance.
struct CombinationWeights {
  std::array<double, 3> theta{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::map<std::string, LinearFit> per_target_fit;
  double residual = 0.0;  // final mean squared error
};

struct FitConfig {
  double step = 0.05;
  // Plants with theta on a simplex face need well over 5k iterations to push
  // the residual below 1e-8; the problem is tiny, so run long by default.
  int iterations = 40000;
  double min_w = 1e-6;
};

struct FitResult {
  CombinationWeights weights;
  std::vector<double> loss_log;  // objective recorded every iteration
};

// theta1*tvc + theta2*tis + theta3*lo.
double combined_score(const CombinationWeights& weights, const SimilarityTriple& t);

// Euclidean projection onto { x >= 0, sum x = 1 }.
std::array<double, 3> project_to_simplex(std::array<double, 3> v);

// Minimizes the mean over records of (w_target * C + b_target - performance)^2
// by full-batch projected gradient descent: theta is re-projected onto the
// simplex and (w, b) clamped to (>= min_w, >= 0) after every step. Requires
// at least 4 records per target.
FitResult fit_weights(const std::vector<SweepRecord>& records,
                      const FitConfig& config = {});

// Leave-target-out variant: the entry for target t is fitted on every record
// whose target is not t, so t's own sweep results never shape its theta.
std::map<std::string, CombinationWeights> fit_weights_per_target(
    const std::vector<SweepRecord>& records, const FitConfig& config = {});

struct Candidate {
  std::vector<std::string> combination;  // sorted source names
  SimilarityTriple triple;
};

// Argmax of the combined score; ties broken by fewer domains, then
// lexicographic name order.
const Candidate& select_combination(const std::vector<Candidate>& candidates,
                                    const CombinationWeights& weights);

// All 2^M - 1 non-empty source subsets, each merged and scored against the
// target under the universe's idf statistics. M is capped at 20.
std::vector<Candidate> enumerate_candidates(const std::vector<Domain>& sources,
                                            const Domain& target,
                                            const std::vector<Domain>& universe,
                                            LabelPolicy policy = LabelPolicy::kSlotNames);

std::string join_combination(const std::vector<std::string>& combination);
std::vector<std::string> split_combination(const std::string& joined);

void save_weights_json(const CombinationWeights& weights, const std::string& path);
CombinationWeights load_weights_json(const std::string& path);

}  // namespace spsel
