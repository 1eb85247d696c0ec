#include "spsel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace fs = std::filesystem;

namespace spsel {

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

void ExperimentPlan::validate() const {
  if (universe.size() < 2) {
    throw ValidationError("plan: universe needs at least 2 domains");
  }
  if (min_size < 1) throw ValidationError("plan: min_size must be >= 1");
  if (max_size < 0) throw ValidationError("plan: max_size must be >= 0");
  if (out_dir.empty()) throw ValidationError("plan: out_dir is required");
  std::set<std::string> names;
  for (const Domain& d : universe) {
    if (!names.insert(d.name).second) {
      throw ValidationError("plan: duplicate domain name \"" + d.name + "\"");
    }
  }
  for (const std::string& t : targets) {
    if (!names.count(t)) {
      throw ValidationError("plan: target \"" + t + "\" is not in the universe");
    }
  }
  train.validate();
}

void parallel_run(const std::vector<std::function<void()>>& tasks, int jobs) {
  if (tasks.empty()) return;
  unsigned n = jobs > 0 ? static_cast<unsigned>(jobs) : std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  n = std::min<unsigned>(n, static_cast<unsigned>(tasks.size()));
  if (n == 1) {
    for (const auto& task : tasks) task();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(n);
  for (unsigned w = 0; w < n; ++w) {
    workers.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        tasks[i]();
      }
    });
  }
  for (std::thread& t : workers) t.join();
}

// ---- CSV I/O ----

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("malformed number \"" + s + "\" in " + context);
  }
}

}  // namespace

void write_records_csv(const std::vector<SweepRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write records: " + path);
  out << "target,combination,tvc,tis,lo,f1\n";
  for (const SweepRecord& r : records) {
    out << r.target << ',' << join_combination(r.combination) << ','
        << format_double(r.triple.tvc) << ',' << format_double(r.triple.tis) << ','
        << format_double(r.triple.lo) << ',' << format_double(r.performance) << '\n';
  }
}

std::vector<SweepRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open records: " + path);
  std::vector<SweepRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("target,", 0) == 0) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 6) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected 6 fields, got " + std::to_string(fields.size()));
    }
    SweepRecord r;
    r.target = fields[0];
    r.combination = split_combination(fields[1]);
    const std::string context = path + ":" + std::to_string(line_no);
    r.triple.tvc = parse_double(fields[2], context);
    r.triple.tis = parse_double(fields[3], context);
    r.triple.lo = parse_double(fields[4], context);
    r.performance = parse_double(fields[5], context);
    r.triple.source_name = fields[1];
    r.triple.target_name = r.target;
    records.push_back(std::move(r));
  }
  return records;
}

void write_runs_csv(const std::vector<RunRow>& runs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write runs: " + path);
  out << "target,combination,seed,f1\n";
  for (const RunRow& r : runs) {
    out << r.target << ',' << join_combination(r.combination) << ',' << r.seed << ','
        << format_double(r.f1) << '\n';
  }
}

std::vector<RunRow> read_runs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open runs: " + path);
  std::vector<RunRow> runs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("target,", 0) == 0) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected 4 fields, got " + std::to_string(fields.size()));
    }
    RunRow r;
    r.target = fields[0];
    r.combination = split_combination(fields[1]);
    r.seed = static_cast<std::uint64_t>(
        parse_double(fields[2], path + ":" + std::to_string(line_no)));
    r.f1 = parse_double(fields[3], path + ":" + std::to_string(line_no));
    runs.push_back(std::move(r));
  }
  return runs;
}

// ---- sweep ----

namespace {

struct Cell {
  std::string target;
  std::vector<std::string> combination;
  SimilarityTriple triple;
  bool done = false;
  bool failed = false;
  std::string error;
  std::vector<double> per_seed_f1;
};

bool cell_order(const Cell& a, const Cell& b) {
  if (a.target != b.target) return a.target < b.target;
  if (a.combination.size() != b.combination.size()) {
    return a.combination.size() < b.combination.size();
  }
  return a.combination < b.combination;
}

const Domain& domain_by_name(const std::vector<Domain>& universe, const std::string& name) {
  for (const Domain& d : universe) {
    if (d.name == name) return d;
  }
  throw ValidationError("unknown domain \"" + name + "\"");
}

}  // namespace

SweepOutcome sweep(const ExperimentPlan& plan) {
  plan.validate();
  fs::create_directories(plan.out_dir);
  const std::string records_path = (fs::path(plan.out_dir) / "records.csv").string();
  const std::string runs_path = (fs::path(plan.out_dir) / "runs.csv").string();
  const std::string log_path = (fs::path(plan.out_dir) / "run.log").string();

  std::vector<std::string> targets = plan.targets;
  if (targets.empty()) {
    for (const Domain& d : plan.universe) targets.push_back(d.name);
    std::sort(targets.begin(), targets.end());
  }

  // Previously completed cells (resume) and their per-seed rows.
  std::map<std::pair<std::string, std::string>, SweepRecord> existing;
  std::map<std::pair<std::string, std::string>, std::vector<RunRow>> existing_runs;
  if (fs::exists(records_path)) {
    for (SweepRecord& r : read_records_csv(records_path)) {
      existing[{r.target, join_combination(r.combination)}] = std::move(r);
    }
  }
  if (fs::exists(runs_path)) {
    for (RunRow& r : read_runs_csv(runs_path)) {
      existing_runs[{r.target, join_combination(r.combination)}].push_back(std::move(r));
    }
  }

  std::vector<Cell> cells;
  for (const std::string& target_name : targets) {
    const Domain& target = domain_by_name(plan.universe, target_name);
    std::vector<Domain> sources;
    for (const Domain& d : plan.universe) {
      if (d.name != target_name) sources.push_back(d);
    }
    const int m = static_cast<int>(sources.size());
    const int max_size = plan.max_size == 0 ? m : std::min(plan.max_size, m);
    const std::vector<Candidate> candidates =
        enumerate_candidates(sources, target, plan.universe, plan.label_policy);
    for (const Candidate& candidate : candidates) {
      const int size = static_cast<int>(candidate.combination.size());
      if (size < plan.min_size || size > max_size) continue;
      Cell cell;
      cell.target = target_name;
      cell.combination = candidate.combination;
      cell.triple = candidate.triple;
      cells.push_back(std::move(cell));
    }
  }
  std::sort(cells.begin(), cells.end(), cell_order);

  SweepOutcome outcome;
  std::vector<std::function<void()>> tasks;
  std::vector<Cell*> pending;
  for (Cell& cell : cells) {
    const auto key = std::make_pair(cell.target, join_combination(cell.combination));
    if (existing.count(key)) {
      cell.done = true;
      outcome.skipped_runs++;
      continue;
    }
    pending.push_back(&cell);
  }
  for (Cell* cell : pending) {
    tasks.emplace_back([cell, &plan] {
      try {
        std::vector<Domain> members;
        for (const std::string& name : cell->combination) {
          members.push_back(domain_by_name(plan.universe, name));
        }
        const Domain& target = domain_by_name(plan.universe, cell->target);
        const EvalResult result = run_experiment(members, target, plan.train);
        cell->per_seed_f1 = result.per_seed_f1;
        cell->done = true;
      } catch (const std::exception& e) {
        cell->failed = true;
        cell->error = e.what();
      }
    });
  }
  parallel_run(tasks, plan.jobs);

  // Deterministic merge: every cell in (target, size, combination) order.
  std::vector<RunRow> all_runs;
  for (const Cell& cell : cells) {
    const auto key = std::make_pair(cell.target, join_combination(cell.combination));
    if (cell.failed) {
      outcome.failed_runs++;
      continue;
    }
    SweepRecord record;
    if (existing.count(key)) {
      record = existing[key];
      for (const RunRow& r : existing_runs[key]) all_runs.push_back(r);
    } else {
      record.target = cell.target;
      record.combination = cell.combination;
      record.triple = cell.triple;
      record.performance =
          std::accumulate(cell.per_seed_f1.begin(), cell.per_seed_f1.end(), 0.0) /
          static_cast<double>(cell.per_seed_f1.size());
      outcome.new_runs++;
      for (std::size_t i = 0; i < cell.per_seed_f1.size(); ++i) {
        all_runs.push_back(RunRow{cell.target, cell.combination, plan.train.seeds[i],
                                  cell.per_seed_f1[i]});
      }
    }
    outcome.records.push_back(std::move(record));
  }
  std::sort(all_runs.begin(), all_runs.end(), [](const RunRow& a, const RunRow& b) {
    if (a.target != b.target) return a.target < b.target;
    if (a.combination.size() != b.combination.size()) {
      return a.combination.size() < b.combination.size();
    }
    if (a.combination != b.combination) return a.combination < b.combination;
    return a.seed < b.seed;
  });
  outcome.runs = all_runs;

  write_records_csv(outcome.records, records_path);
  write_runs_csv(outcome.runs, runs_path);

  std::ofstream log(log_path);
  log << "universe:";
  for (const Domain& d : plan.universe) log << ' ' << d.name;
  log << "\nsizes: " << plan.min_size << ".." << (plan.max_size == 0 ? -1 : plan.max_size)
      << "\nseeds: " << plan.train.seeds.size() << "\ncells: " << cells.size()
      << "\nnew: " << outcome.new_runs << "\nskipped: " << outcome.skipped_runs
      << "\nfailed: " << outcome.failed_runs << "\n";
  for (const Cell& cell : cells) {
    if (cell.failed) {
      log << "FAILED " << cell.target << " <- " << join_combination(cell.combination)
          << ": " << cell.error << "\n";
    }
  }
  return outcome;
}

// ---- matrices ----

namespace {

struct SeedStats {
  double mean = 0.0;
  double stddev = 0.0;
};

SeedStats stats_of(const std::vector<double>& values) {
  SeedStats s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  if (values.size() > 1) {
    double variance = 0.0;
    for (double v : values) variance += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(variance / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::map<std::pair<std::string, std::string>, std::map<std::uint64_t, double>>
index_runs(const std::vector<RunRow>& runs) {
  std::map<std::pair<std::string, std::string>, std::map<std::uint64_t, double>> index;
  for (const RunRow& r : runs) {
    index[{r.target, join_combination(r.combination)}][r.seed] = r.f1;
  }
  return index;
}

}  // namespace

MatrixResult leave_one_out_matrix(const ExperimentPlan& plan) {
  if (plan.universe.size() < 3) {
    throw ValidationError("leave_one_out_matrix: need at least 3 domains");
  }
  const int m = static_cast<int>(plan.universe.size());
  ExperimentPlan restricted = plan;
  restricted.min_size = m - 2;
  restricted.max_size = m - 1;
  const SweepOutcome outcome = sweep(restricted);
  const auto runs = index_runs(outcome.runs);

  std::vector<std::string> names;
  for (const Domain& d : plan.universe) names.push_back(d.name);
  std::sort(names.begin(), names.end());

  MatrixResult matrix;
  matrix.targets = names;
  matrix.sources = names;
  const int n = static_cast<int>(names.size());
  matrix.mean = Matrix::Constant(n, n, std::nan(""));
  matrix.stddev = Matrix::Constant(n, n, std::nan(""));

  for (int t = 0; t < n; ++t) {
    std::vector<std::string> all_sources;
    for (const std::string& s : names) {
      if (s != names[static_cast<std::size_t>(t)]) all_sources.push_back(s);
    }
    const auto full_it =
        runs.find({names[static_cast<std::size_t>(t)], join_combination(all_sources)});
    if (full_it == runs.end()) continue;  // failed cell
    for (int s = 0; s < n; ++s) {
      if (s == t) continue;
      std::vector<std::string> reduced;
      for (const std::string& name : all_sources) {
        if (name != names[static_cast<std::size_t>(s)]) reduced.push_back(name);
      }
      const auto reduced_it =
          runs.find({names[static_cast<std::size_t>(t)], join_combination(reduced)});
      if (reduced_it == runs.end()) continue;
      std::vector<double> differences;
      for (const auto& [seed, f1] : full_it->second) {
        const auto other = reduced_it->second.find(seed);
        if (other != reduced_it->second.end()) {
          differences.push_back(f1 - other->second);
        }
      }
      const SeedStats stats = stats_of(differences);
      matrix.mean(t, s) = stats.mean;
      matrix.stddev(t, s) = stats.stddev;
    }
  }
  return matrix;
}

MatrixResult single_source_matrix(const ExperimentPlan& plan) {
  ExperimentPlan restricted = plan;
  restricted.min_size = 1;
  restricted.max_size = 1;
  const SweepOutcome outcome = sweep(restricted);
  const auto runs = index_runs(outcome.runs);

  std::vector<std::string> names;
  for (const Domain& d : plan.universe) names.push_back(d.name);
  std::sort(names.begin(), names.end());

  MatrixResult matrix;
  matrix.targets = names;
  matrix.sources = names;
  const int n = static_cast<int>(names.size());
  matrix.mean = Matrix::Constant(n, n, std::nan(""));
  matrix.stddev = Matrix::Constant(n, n, std::nan(""));

  for (int t = 0; t < n; ++t) {
    for (int s = 0; s < n; ++s) {
      if (s == t) continue;
      const auto it = runs.find({names[static_cast<std::size_t>(t)],
                                 names[static_cast<std::size_t>(s)]});
      if (it == runs.end()) continue;
      std::vector<double> values;
      for (const auto& [seed, f1] : it->second) values.push_back(f1);
      const SeedStats stats = stats_of(values);
      matrix.mean(t, s) = stats.mean;
      matrix.stddev(t, s) = stats.stddev;
    }
  }
  return matrix;
}

void save_matrix_csv(const MatrixResult& matrix, const std::string& mean_path,
                     const std::string& stddev_path) {
  auto write = [&](const Matrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write matrix: " + path);
    out << "target";
    for (const std::string& s : matrix.sources) out << ',' << s;
    out << '\n';
    for (std::size_t t = 0; t < matrix.targets.size(); ++t) {
      out << matrix.targets[t];
      for (std::size_t s = 0; s < matrix.sources.size(); ++s) {
        const double v = m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s));
        out << ',';
        if (!std::isnan(v)) out << format_double(v);
      }
      out << '\n';
    }
  };
  write(matrix.mean, mean_path);
  write(matrix.stddev, stddev_path);
}

MatrixResult load_matrix_csv(const std::string& mean_path, const std::string& stddev_path) {
  auto read = [](const std::string& path, MatrixResult& matrix, Matrix& into) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open matrix: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty matrix file: " + path);
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "target") {
      throw ValidationError("malformed matrix header in " + path);
    }
    std::vector<std::string> sources(header.begin() + 1, header.end());
    std::vector<std::string> targets;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      if (fields.size() != sources.size() + 1) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": field count");
      }
      targets.push_back(fields[0]);
      std::vector<double> row;
      for (std::size_t i = 1; i < fields.size(); ++i) {
        row.push_back(fields[i].empty()
                          ? std::nan("")
                          : parse_double(fields[i], path + ":" + std::to_string(line_no)));
      }
      rows.push_back(std::move(row));
    }
    if (matrix.sources.empty()) {
      matrix.sources = sources;
      matrix.targets = targets;
    } else if (matrix.sources != sources || matrix.targets != targets) {
      throw ValidationError("matrix mean/stddev files disagree on headers");
    }
    into.resize(static_cast<Eigen::Index>(targets.size()),
                static_cast<Eigen::Index>(sources.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
      for (std::size_t s = 0; s < rows[t].size(); ++s) {
        into(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) = rows[t][s];
      }
    }
  };
  MatrixResult matrix;
  read(mean_path, matrix, matrix.mean);
  read(stddev_path, matrix, matrix.stddev);
  return matrix;
}

// ---- emitters ----

namespace {

std::map<std::string, std::vector<SweepRecord>> records_by_target(
    const std::vector<SweepRecord>& records) {
  std::map<std::string, std::vector<SweepRecord>> by_target;
  for (const SweepRecord& r : records) by_target[r.target].push_back(r);
  return by_target;
}

}  // namespace

const SweepRecord& pick_by_metric(const std::vector<SweepRecord>& target_records,
                                  const std::string& metric,
                                  const CombinationWeights* weights) {
  if (target_records.empty()) {
    throw ValidationError("pick_by_metric: no records");
  }
  auto score = [&](const SweepRecord& r) {
    if (metric == "tvc") return r.triple.tvc;
    if (metric == "tis") return r.triple.tis;
    if (metric == "lo") return r.triple.lo;
    if (metric == "combined") {
      if (!weights) throw ValidationError("pick_by_metric: combined needs weights");
      return combined_score(*weights, r.triple);
    }
    throw ValidationError("pick_by_metric: unknown metric \"" + metric + "\"");
  };
  const SweepRecord* best = &target_records.front();
  double best_score = score(*best);
  for (const SweepRecord& r : target_records) {
    const double s = score(r);
    if (s > best_score ||
        (s == best_score && (r.combination.size() < best->combination.size() ||
                             (r.combination.size() == best->combination.size() &&
                              r.combination < best->combination)))) {
      best = &r;
      best_score = s;
    }
  }
  return *best;
}

void emit_scatter(const std::string& records_csv, const std::string& weights_json,
                  const std::string& out_dir) {
  const std::vector<SweepRecord> records = read_records_csv(records_csv);
  if (records.empty()) throw ValidationError("emit_scatter: no records");
  fs::create_directories(out_dir);

  auto write = [&](const std::string& name, auto&& value) {
    std::ofstream out((fs::path(out_dir) / ("scatter_" + name + ".csv")).string());
    out << "target,similarity,f1\n";
    for (const SweepRecord& r : records) {
      out << r.target << ',' << format_double(value(r)) << ','
          << format_double(r.performance) << '\n';
    }
  };
  write("tvc", [](const SweepRecord& r) { return r.triple.tvc; });
  write("tis", [](const SweepRecord& r) { return r.triple.tis; });
  write("lo", [](const SweepRecord& r) { return r.triple.lo; });
  if (!weights_json.empty()) {
    const CombinationWeights weights = load_weights_json(weights_json);
    write("combined",
          [&](const SweepRecord& r) { return combined_score(weights, r.triple); });
  }
}

void emit_boxplot(const std::string& records_csv, const std::string& out_path) {
  const std::vector<SweepRecord> records = read_records_csv(records_csv);
  if (records.empty()) throw ValidationError("emit_boxplot: no records");
  std::ofstream out(out_path);
  if (!out) throw ValidationError("cannot write " + out_path);
  out << "n_sources,f1\n";
  std::vector<SweepRecord> sorted = records;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SweepRecord& a, const SweepRecord& b) {
                     return a.combination.size() < b.combination.size();
                   });
  for (const SweepRecord& r : sorted) {
    out << r.combination.size() << ',' << format_double(r.performance) << '\n';
  }
}

void emit_heatmap(const std::string& matrix_csv, const std::string& out_path) {
  std::ifstream in(matrix_csv);
  if (!in) throw ValidationError("cannot open matrix: " + matrix_csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("target,", 0) != 0) {
    throw ValidationError("emit_heatmap: " + matrix_csv + " is not a matrix CSV");
  }
  const std::size_t columns = split_csv_line(line).size();
  std::vector<std::string> rows = {line};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != columns) {
      throw ValidationError("emit_heatmap: " + matrix_csv + ":" +
                            std::to_string(line_no) + ": field count mismatch");
    }
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (!fields[i].empty()) {
        parse_double(fields[i], matrix_csv + ":" + std::to_string(line_no));
      }
    }
    rows.push_back(line);
  }
  std::ofstream out(out_path);
  if (!out) throw ValidationError("cannot write " + out_path);
  for (const std::string& row : rows) out << row << '\n';
}

void emit_selector_compare(const std::string& records_csv, const std::string& weights_json,
                           const std::string& out_path) {
  const std::vector<SweepRecord> records = read_records_csv(records_csv);
  if (records.empty()) throw ValidationError("emit_selector_compare: no records");
  const CombinationWeights weights = load_weights_json(weights_json);
  std::ofstream out(out_path);
  if (!out) throw ValidationError("cannot write " + out_path);
  out << "target,selector,f1\n";
  for (const auto& [target, target_records] : records_by_target(records)) {
    for (const std::string metric : {"tvc", "tis", "lo", "combined"}) {
      const SweepRecord& pick = pick_by_metric(target_records, metric, &weights);
      out << target << ',' << metric << ',' << format_double(pick.performance) << '\n';
    }
  }
}

// ---- config files ----

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::map<std::string, std::string> config;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    const auto last = s.find_last_not_of(" \t\r");
    return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected key = value");
    }
    config[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return config;
}

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& value) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    seeds.push_back(static_cast<std::uint64_t>(std::stoull(part)));
  }
  if (seeds.empty()) throw ValidationError("config: empty seed list");
  return seeds;
}

}  // namespace

void apply_config(const std::map<std::string, std::string>& config, TrainConfig& train,
                  ExperimentPlan* plan) {
  auto get_double = [&](const char* key, double& into) {
    const auto it = config.find(key);
    if (it != config.end()) into = parse_double(it->second, std::string("config key ") + key);
  };
  auto get_int = [&](const char* key, int& into) {
    const auto it = config.find(key);
    if (it != config.end()) {
      into = static_cast<int>(parse_double(it->second, std::string("config key ") + key));
    }
  };
  get_double("learning_rate", train.learning_rate);
  get_double("weight_decay", train.weight_decay);
  get_int("epochs", train.epochs);
  get_double("tau", train.tau);
  get_double("alpha", train.loss_weights.alpha);
  get_double("beta", train.loss_weights.beta);
  get_double("gamma", train.loss_weights.gamma);
  get_double("delta", train.loss_weights.delta);
  get_int("k_shot", train.k_shot);
  get_int("hidden", train.hidden);
  get_int("train_episodes", train.train_episodes);
  get_int("eval_episodes", train.eval_episodes);
  get_int("query_size", train.query_size);
  get_int("unknown_buckets", train.unknown_buckets);
  if (const auto it = config.find("seeds"); it != config.end()) {
    train.seeds = parse_seed_list(it->second);
  }
  if (const auto it = config.find("similarity_mode"); it != config.end()) {
    if (it->second == "cosine") {
      train.mode = SimilarityMode::kCosine;
    } else if (it->second == "vpb") {
      train.mode = SimilarityMode::kVpb;
    } else {
      throw ValidationError("config: similarity_mode must be cosine or vpb");
    }
  }
  if (const auto it = config.find("ortho_mode"); it != config.end()) {
    if (it->second == "abs_dot") {
      train.ortho = OrthoMode::kPerWordAbsDot;
    } else if (it->second == "frobenius") {
      train.ortho = OrthoMode::kFrobenius;
    } else {
      throw ValidationError("config: ortho_mode must be abs_dot or frobenius");
    }
  }
  if (plan) {
    get_int("min_size", plan->min_size);
    get_int("max_size", plan->max_size);
    get_int("jobs", plan->jobs);
    if (const auto it = config.find("label_policy"); it != config.end()) {
      if (it->second == "slots") {
        plan->label_policy = LabelPolicy::kSlotNames;
      } else if (it->second == "raw_bio") {
        plan->label_policy = LabelPolicy::kRawBio;
      } else {
        throw ValidationError("config: label_policy must be slots or raw_bio");
      }
    }
  }
}

}  // namespace spsel
