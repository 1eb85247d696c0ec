#pragma once

#include <map>
#include <string>
#include <vector>

#include "spsel/corpus.hpp"
#include "spsel/selection.hpp"
#include "spsel/trainer.hpp"
#include "spsel/types.hpp"

namespace spsel {

// A cross-validation experiment over a domain universe: each listed target
// (default: every domain in turn) is evaluated with the remaining domains as
// candidate sources.
struct ExperimentPlan {
  std::vector<Domain> universe;
  std::vector<std::string> targets;  // empty = full rotation
  int min_size = 1;
  int max_size = 0;  // 0 = all remaining sources
  std::string out_dir;
  TrainConfig train;
  LabelPolicy label_policy = LabelPolicy::kSlotNames;
  int jobs = 0;  // 0 = hardware concurrency

  void validate() const;
};

// One trained (target, combination) cell with its per-seed outcomes.
struct RunRow {
  std::string target;
  std::vector<std::string> combination;
  std::uint64_t seed = 0;
  double f1 = 0.0;
};

struct SweepOutcome {
  std::vector<SweepRecord> records;  // one per (target, combination), F1 = seed mean
  std::vector<RunRow> runs;          // one per (target, combination, seed)
  int new_runs = 0;                  // combinations trained by this call
  int skipped_runs = 0;              // combinations already present in records.csv
  int failed_runs = 0;
};

// Trains every (target, combination) cell in the plan's size range, resuming
// from <out_dir>/records.csv. Rewrites records.csv, runs.csv and run.log in
// deterministic (target, size, combination) order.
SweepOutcome sweep(const ExperimentPlan& plan);

struct MatrixResult {
  std::vector<std::string> targets;
  std::vector<std::string> sources;
  Matrix mean;    // targets x sources; diagonal cells are NaN
  Matrix stddev;  // sample standard deviation across seeds
};

// Entry (t, s) = F1(all sources) - F1(all sources minus s), per-seed
// differences aggregated across seeds. Negative entries mean removing s
// helped. Needs >= 3 domains.
MatrixResult leave_one_out_matrix(const ExperimentPlan& plan);

// Entry (t, s) = F1 training on s alone.
MatrixResult single_source_matrix(const ExperimentPlan& plan);

void save_matrix_csv(const MatrixResult& matrix, const std::string& mean_path,
                     const std::string& stddev_path);
MatrixResult load_matrix_csv(const std::string& mean_path,
                             const std::string& stddev_path);

// records/runs CSV (pinned formats: `target,combination,tvc,tis,lo,f1` and
// `target,combination,seed,f1`; combination is `+`-joined).
void write_records_csv(const std::vector<SweepRecord>& records, const std::string& path);
std::vector<SweepRecord> read_records_csv(const std::string& path);
void write_runs_csv(const std::vector<RunRow>& runs, const std::string& path);
std::vector<RunRow> read_runs_csv(const std::string& path);

// Figure-data emitters: pure transforms of their input CSVs.
// scatter_{tvc,tis,lo}.csv and (with weights) scatter_combined.csv hold
// `target,similarity,f1` rows.
void emit_scatter(const std::string& records_csv, const std::string& weights_json,
                  const std::string& out_dir);
// `n_sources,f1` rows.
void emit_boxplot(const std::string& records_csv, const std::string& out_path);
// Copies a matrix CSV through (validating shape) so figures/ is self-contained.
void emit_heatmap(const std::string& matrix_csv, const std::string& out_path);
// `target,selector,f1`: each selector picks its own argmax combination among
// the sweep's candidates and reports that combination's recorded F1.
void emit_selector_compare(const std::string& records_csv, const std::string& weights_json,
                           const std::string& out_path);

// Deterministic selector over sweep records (tie-break: fewer domains, then
// lexicographic combination order). metric is one of "tvc", "tis", "lo",
// "combined"; combined requires weights.
const SweepRecord& pick_by_metric(const std::vector<SweepRecord>& target_records,
                                  const std::string& metric,
                                  const CombinationWeights* weights);

// key = value configuration file ('#' starts a comment).
std::map<std::string, std::string> parse_config_file(const std::string& path);
void apply_config(const std::map<std::string, std::string>& config, TrainConfig& train,
                  ExperimentPlan* plan = nullptr);

// Bounded worker pool; results land in input order.
void parallel_run(const std::vector<std::function<void()>>& tasks, int jobs);

std::string format_double(double v);

}  // namespace spsel
