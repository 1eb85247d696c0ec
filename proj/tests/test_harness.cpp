#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "spsel/benchmark.hpp"
#include "spsel/harness.hpp"
#include "spsel/rng.hpp"

using namespace spsel;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TrainConfig tiny_train() {
  TrainConfig config;
  config.epochs = 1;
  config.seeds = {1, 2};
  config.hidden = 6;
  config.train_episodes = 2;
  config.eval_episodes = 2;
  config.query_size = 4;
  return config;
}

std::vector<Domain> tiny_universe() {
  std::vector<LabeledSentence> a, b, c;
  for (int i = 0; i < 6; ++i) {
    a.push_back({{"to", "london", std::to_string(i)}, {"O", "B-city", "O"}});
    b.push_back({{"in", "paris", std::to_string(i)}, {"O", "B-city", "O"}});
    c.push_back({{"play", "adele", std::to_string(i)}, {"O", "B-artist", "O"}});
  }
  return {make_domain("alpha", std::move(a)), make_domain("beta", std::move(b)),
          make_domain("gamma", std::move(c))};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("benchmark generator is deterministic and well-formed") {
  const auto domains = generate_benchmark({});
  REQUIRE(domains.size() == 6);
  CHECK(domains[0].name == "tra");
  CHECK(domains[5].name == "adv");

  // adversarial domain is fully disjoint from the others
  const Domain& adv = domains[5];
  for (std::size_t i = 0; i < 5; ++i) {
    for (const std::string& token : adv.vocabulary) {
      CHECK(domains[i].vocabulary.count(token) == 0);
    }
    for (const std::string& slot : adv.label_set) {
      CHECK(domains[i].label_set.count(slot) == 0);
    }
  }

  // families overlap
  CHECK(tvc(domains[1], domains[0]) > 0.5);
  CHECK(lo(domains[1], domains[0]) == 1.0);
  // cross domain shares vocabulary but no labels with the travel family
  CHECK(tvc(domains[4], domains[0]) > 0.2);
  CHECK(lo(domains[4], domains[0]) == 0.0);

  const auto again = generate_benchmark({});
  for (std::size_t i = 0; i < domains.size(); ++i) {
    CHECK(again[i].sentences == domains[i].sentences);
  }
}

TEST_CASE("sweep produces sum-of-binomials records per target and resumes") {
  const fs::path dir = fresh_dir("spsel_sweep_test");
  ExperimentPlan plan;
  plan.universe = tiny_universe();
  plan.targets = {"alpha"};
  plan.min_size = 1;
  plan.max_size = 2;
  plan.out_dir = dir.string();
  plan.train = tiny_train();
  plan.jobs = 2;

  const SweepOutcome first = sweep(plan);
  // 2 remaining sources: C(2,1) + C(2,2) = 3
  CHECK(first.records.size() == 3);
  CHECK(first.new_runs == 3);
  CHECK(first.skipped_runs == 0);
  CHECK(first.runs.size() == 3 * plan.train.seeds.size());

  const std::string records_before = read_file((dir / "records.csv").string());

  const SweepOutcome second = sweep(plan);
  CHECK(second.new_runs == 0);
  CHECK(second.skipped_runs == 3);
  CHECK(read_file((dir / "records.csv").string()) == records_before);

  SUBCASE("record triples equal an independent recomputation") {
    for (const SweepRecord& r : first.records) {
      std::vector<Domain> members;
      for (const std::string& name : r.combination) {
        for (const Domain& d : plan.universe) {
          if (d.name == name) members.push_back(d);
        }
      }
      const Domain merged = merge_domains(members, "m");
      const Domain& target = plan.universe[0];
      CHECK(r.triple.tvc == doctest::Approx(oracle::tvc(merged, target)).epsilon(1e-12));
      CHECK(r.triple.tis ==
            doctest::Approx(oracle::tis(merged, target, plan.universe)).epsilon(1e-12));
      CHECK(r.triple.lo == doctest::Approx(oracle::lo(merged, target)).epsilon(1e-12));
    }
  }

  SUBCASE("full rotation covers every target") {
    const fs::path dir2 = fresh_dir("spsel_sweep_rotation");
    ExperimentPlan rotation = plan;
    rotation.targets = {};
    rotation.out_dir = dir2.string();
    const SweepOutcome all = sweep(rotation);
    CHECK(all.records.size() == 9);  // 3 targets x 3 combinations
  }
}

TEST_CASE("a failed combination is logged and skipped, not fatal") {
  // "rare" occurs in a single sentence of gamma, so k=2 is infeasible for
  // any combination whose only slot source is gamma alone.
  std::vector<LabeledSentence> a, b, c;
  for (int i = 0; i < 6; ++i) {
    a.push_back({{"to", "london", std::to_string(i)}, {"O", "B-city", "O"}});
    b.push_back({{"in", "paris", std::to_string(i)}, {"O", "B-city", "O"}});
    c.push_back({{"pad", std::to_string(i)}, {"O", "O"}});
  }
  c.push_back({{"odd", "rare"}, {"O", "B-rare"}});
  ExperimentPlan plan;
  plan.universe = {make_domain("alpha", std::move(a)), make_domain("beta", std::move(b)),
                   make_domain("gamma", std::move(c))};
  plan.targets = {"alpha"};
  plan.out_dir = fresh_dir("spsel_failed_combo").string();
  plan.train = tiny_train();
  plan.train.k_shot = 2;
  plan.jobs = 2;

  const SweepOutcome outcome = sweep(plan);
  CHECK(outcome.failed_runs >= 1);
  CHECK(outcome.records.size() + static_cast<std::size_t>(outcome.failed_runs) == 3);
  for (const SweepRecord& r : outcome.records) {
    CHECK(r.combination != std::vector<std::string>{"gamma"});
  }
  const std::string log = read_file((fs::path(plan.out_dir) / "run.log").string());
  CHECK(log.find("FAILED") != std::string::npos);
  CHECK(log.find("gamma") != std::string::npos);
}

TEST_CASE("records CSV round-trips") {
  const fs::path dir = fresh_dir("spsel_records_roundtrip");
  std::vector<SweepRecord> records;
  SweepRecord r;
  r.target = "alpha";
  r.combination = {"beta", "gamma"};
  r.triple.tvc = 1.0 / 3;
  r.triple.tis = 0.123456789012345678;
  r.triple.lo = 1.0;
  r.performance = 0.875;
  records.push_back(r);
  const std::string path = (dir / "records.csv").string();
  write_records_csv(records, path);
  const auto loaded = read_records_csv(path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].target == "alpha");
  CHECK(loaded[0].combination == std::vector<std::string>{"beta", "gamma"});
  CHECK(loaded[0].triple.tvc == records[0].triple.tvc);
  CHECK(loaded[0].triple.tis == records[0].triple.tis);
  CHECK(loaded[0].performance == records[0].performance);

  CHECK_THROWS_AS(read_records_csv((dir / "missing.csv").string()), ValidationError);
}

TEST_CASE("matrices have no diagonal and aggregate per-seed runs") {
  const fs::path dir = fresh_dir("spsel_matrix_test");
  ExperimentPlan plan;
  plan.universe = tiny_universe();
  plan.out_dir = (dir / "loo").string();
  plan.train = tiny_train();
  plan.jobs = 2;

  const MatrixResult loo = leave_one_out_matrix(plan);
  REQUIRE(loo.targets.size() == 3);
  for (int t = 0; t < 3; ++t) {
    CHECK(std::isnan(loo.mean(t, t)));
    for (int s = 0; s < 3; ++s) {
      if (s != t) CHECK(std::isfinite(loo.mean(t, s)));
    }
  }

  // entries equal recomputation from the runs CSV
  const auto runs = read_runs_csv((fs::path(plan.out_dir) / "runs.csv").string());
  auto mean_f1 = [&](const std::string& target, const std::string& combo) {
    double total = 0;
    int n = 0;
    for (const RunRow& row : runs) {
      if (row.target == target && join_combination(row.combination) == combo) {
        total += row.f1;
        ++n;
      }
    }
    REQUIRE(n > 0);
    return total / n;
  };
  // target alpha, removing gamma: full = beta+gamma
  const double full = mean_f1("alpha", "beta+gamma");
  const double without_gamma = mean_f1("alpha", "beta");
  const int gamma_col = 2;
  CHECK(loo.mean(0, gamma_col) == doctest::Approx(full - without_gamma).epsilon(1e-12));

  plan.out_dir = (dir / "single").string();
  const MatrixResult single = single_source_matrix(plan);
  for (int t = 0; t < 3; ++t) {
    for (int s = 0; s < 3; ++s) {
      if (s == t) {
        CHECK(std::isnan(single.mean(t, s)));
      } else {
        CHECK(single.mean(t, s) >= 0.0);
        CHECK(single.mean(t, s) <= 1.0);
      }
    }
  }

  SUBCASE("matrix CSV round-trips") {
    const std::string mean_path = (dir / "m.csv").string();
    const std::string std_path = (dir / "s.csv").string();
    save_matrix_csv(loo, mean_path, std_path);
    const MatrixResult loaded = load_matrix_csv(mean_path, std_path);
    CHECK(loaded.targets == loo.targets);
    CHECK(loaded.sources == loo.sources);
    for (int t = 0; t < 3; ++t) {
      for (int s = 0; s < 3; ++s) {
        if (s == t) {
          CHECK(std::isnan(loaded.mean(t, s)));
        } else {
          CHECK(loaded.mean(t, s) == loo.mean(t, s));
        }
      }
    }
  }
}

TEST_CASE("single-source matrix ranks the sibling above the adversary") {
  const auto all = generate_benchmark({});
  ExperimentPlan plan;
  plan.universe = {all[0], all[1], all[5]};  // tra, trb, adv
  plan.out_dir = fresh_dir("spsel_single_rank").string();
  plan.train = tiny_train();
  plan.train.learning_rate = 1e-2;
  plan.train.epochs = 6;
  plan.train.hidden = 12;
  plan.train.train_episodes = 6;
  plan.train.eval_episodes = 3;
  plan.jobs = 2;

  const MatrixResult m = single_source_matrix(plan);
  // names sort to adv, tra, trb
  REQUIRE(m.targets == std::vector<std::string>{"adv", "tra", "trb"});
  const double tra_from_trb = m.mean(1, 2);
  const double tra_from_adv = m.mean(1, 0);
  const double trb_from_tra = m.mean(2, 1);
  const double trb_from_adv = m.mean(2, 0);
  CHECK(tra_from_trb > tra_from_adv);
  CHECK(trb_from_tra > trb_from_adv);
}

TEST_CASE("emitters are pure functions of their input CSVs") {
  const fs::path dir = fresh_dir("spsel_emit_test");

  // planted records: f1 exactly linear in the combined score
  CombinationWeights weights;
  weights.theta = {0.2, 0.3, 0.5};
  weights.per_target_fit["t"] = {0.6, 0.1};
  const std::string weights_path = (dir / "weights.json").string();
  save_weights_json(weights, weights_path);

  Rng rng(3);
  std::vector<SweepRecord> records;
  for (int i = 0; i < 31; ++i) {
    SweepRecord r;
    r.target = "t";
    for (int j = 0; j <= i % 3; ++j) r.combination.push_back("s" + std::to_string(j + i));
    r.triple.tvc = rng.uniform();
    r.triple.tis = rng.uniform();
    r.triple.lo = rng.uniform();
    r.performance = 0.6 * combined_score(weights, r.triple) + 0.1;
    records.push_back(r);
  }
  const std::string records_path = (dir / "records.csv").string();
  write_records_csv(records, records_path);

  SUBCASE("scatter emits one file per indicator plus combined") {
    emit_scatter(records_path, weights_path, (dir / "figures").string());
    for (const std::string name : {"tvc", "tis", "lo", "combined"}) {
      const std::string path = (dir / "figures" / ("scatter_" + name + ".csv")).string();
      CHECK(fs::exists(path));
    }
    // combined scatter of planted linear data correlates almost perfectly
    std::ifstream in((dir / "figures" / "scatter_combined.csv").string());
    std::string line;
    std::getline(in, line);
    CHECK(line == "target,similarity,f1");
    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
      const auto comma1 = line.find(',');
      const auto comma2 = line.find(',', comma1 + 1);
      xs.push_back(std::stod(line.substr(comma1 + 1, comma2 - comma1 - 1)));
      ys.push_back(std::stod(line.substr(comma2 + 1)));
    }
    REQUIRE(xs.size() == records.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    const double pearson = sxy / std::sqrt(sxx * syy);
    CHECK(pearson >= 0.99);

    // re-emission is byte-identical
    const std::string before =
        read_file((dir / "figures" / "scatter_combined.csv").string());
    emit_scatter(records_path, weights_path, (dir / "figures").string());
    CHECK(read_file((dir / "figures" / "scatter_combined.csv").string()) == before);
  }

  SUBCASE("boxplot groups rows by source count") {
    const std::string path = (dir / "boxplot.csv").string();
    emit_boxplot(records_path, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "n_sources,f1");
    int previous = 0;
    while (std::getline(in, line)) {
      const int n = std::stoi(line.substr(0, line.find(',')));
      CHECK(n >= previous);
      previous = n;
    }
  }

  SUBCASE("selector_compare emits one row per selector and target") {
    const std::string path = (dir / "selector_compare.csv").string();
    emit_selector_compare(records_path, weights_path, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "target,selector,f1");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);  // one target, four selectors
  }

  SUBCASE("heatmap validates and copies matrix CSVs") {
    MatrixResult m;
    m.targets = {"a", "b"};
    m.sources = {"a", "b"};
    m.mean = Matrix::Constant(2, 2, std::nan(""));
    m.mean(0, 1) = 0.25;
    m.mean(1, 0) = -0.125;
    m.stddev = m.mean;
    save_matrix_csv(m, (dir / "mat.csv").string(), (dir / "mat_std.csv").string());
    emit_heatmap((dir / "mat.csv").string(), (dir / "heatmap.csv").string());
    CHECK(read_file((dir / "heatmap.csv").string()) ==
          read_file((dir / "mat.csv").string()));
    CHECK_THROWS_AS(emit_heatmap(records_path, (dir / "x.csv").string()),
                    ValidationError);
  }
}

TEST_CASE("pick_by_metric uses the documented tie-breaks") {
  std::vector<SweepRecord> records(3);
  records[0].target = "t";
  records[0].combination = {"a", "b"};
  records[0].triple.tvc = 0.5;
  records[1].target = "t";
  records[1].combination = {"c"};
  records[1].triple.tvc = 0.5;
  records[2].target = "t";
  records[2].combination = {"b"};
  records[2].triple.tvc = 0.5;
  CHECK(pick_by_metric(records, "tvc", nullptr).combination ==
        std::vector<std::string>{"b"});
  CHECK_THROWS_AS(pick_by_metric(records, "nope", nullptr), ValidationError);
  CHECK_THROWS_AS(pick_by_metric(records, "combined", nullptr), ValidationError);
}

TEST_CASE("config files parse key = value pairs with comments") {
  const fs::path dir = fresh_dir("spsel_config_test");
  const std::string path = (dir / "config.txt").string();
  {
    std::ofstream out(path);
    out << "# training\n"
        << "learning_rate = 0.005\n"
        << "epochs = 3\n"
        << "seeds = 4,5,6\n"
        << "similarity_mode = vpb   # prediction scores\n"
        << "alpha = 0.4\n"
        << "min_size = 2\n";
  }
  TrainConfig train;
  ExperimentPlan plan;
  apply_config(parse_config_file(path), train, &plan);
  CHECK(train.learning_rate == 0.005);
  CHECK(train.epochs == 3);
  CHECK(train.seeds == std::vector<std::uint64_t>{4, 5, 6});
  CHECK(train.mode == SimilarityMode::kVpb);
  CHECK(train.loss_weights.alpha == 0.4);
  CHECK(plan.min_size == 2);

  {
    std::ofstream out(path);
    out << "no equals sign here\n";
  }
  TrainConfig t2;
  CHECK_THROWS_AS(apply_config(parse_config_file(path), t2, nullptr), ValidationError);
}

TEST_CASE("parallel_run preserves slot ordering") {
  std::vector<int> results(64, 0);
  std::vector<std::function<void()>> tasks;
  for (int i = 0; i < 64; ++i) {
    tasks.emplace_back([&results, i] { results[static_cast<std::size_t>(i)] = i * i; });
  }
  parallel_run(tasks, 4);
  for (int i = 0; i < 64; ++i) {
    CHECK(results[static_cast<std::size_t>(i)] == i * i);
  }
}
