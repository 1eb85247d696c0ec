// spsel: similarity-guided source-domain selection and a shared-private
// few-shot slot tagger, desk scale.
//
// Subcommands: gen-bench, sim, sweep, fit, select, train, eval, loo-matrix,
// single-matrix, emit. Exit codes: 0 ok, 2 bad input, 3 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spsel/benchmark.hpp"
#include "spsel/corpus.hpp"
#include "spsel/harness.hpp"
#include "spsel/rng.hpp"
#include "spsel/selection.hpp"
#include "spsel/similarity.hpp"
#include "spsel/spnet.hpp"
#include "spsel/trainer.hpp"

namespace fs = std::filesystem;
using namespace spsel;

namespace {

std::vector<Domain> load_domains(const std::vector<std::string>& paths) {
  std::vector<Domain> domains;
  for (const std::string& path : paths) {
    domains.push_back(load_domain(path, fs::path(path).stem().string()));
  }
  return domains;
}

void print_sim_csv(const std::vector<Domain>& domains, LabelPolicy policy,
                   std::ostream& out) {
  out << "source,target,tvc,tis,lo\n";
  TfIdfStats stats(domains);
  std::vector<TfIdfVector> vectors;
  for (const Domain& d : domains) vectors.push_back(stats.vector_for(d));
  for (std::size_t s = 0; s < domains.size(); ++s) {
    for (std::size_t t = 0; t < domains.size(); ++t) {
      if (s == t) continue;
      out << domains[s].name << ',' << domains[t].name << ','
          << format_double(tvc(domains[s], domains[t])) << ','
          << format_double(TfIdfStats::cosine(vectors[s], vectors[t])) << ','
          << format_double(lo(domains[s], domains[t], policy)) << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"similarity-guided source selection + shared-private slot tagger"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir = "out";
  std::string config_path;
  std::uint64_t seed = 1;
  int jobs = 0;
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--seed", seed, "base random seed");
  app.add_option("--jobs", jobs, "worker threads (0 = hardware)");

  // gen-bench
  auto* gen_cmd = app.add_subcommand("gen-bench", "write the synthetic benchmark domains");
  BenchConfig bench;
  gen_cmd->add_option("--sentences", bench.family_sentences, "sentences per family domain");
  gen_cmd->add_option("--cross", bench.cross_sentences, "sentences in the cross domain");
  gen_cmd->add_option("--adv", bench.adversarial_sentences, "sentences in the adversarial domain");

  // sim
  auto* sim_cmd = app.add_subcommand("sim", "similarity triples for all ordered domain pairs");
  std::vector<std::string> sim_paths;
  std::string sim_out;
  sim_cmd->add_option("--domains", sim_paths, "domain JSONL files")->required()->expected(-2);
  sim_cmd->add_option("--out", sim_out, "write CSV here instead of stdout");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "train every source combination per target");
  std::vector<std::string> sweep_paths, sweep_targets;
  int min_size = 1, max_size = 0;
  sweep_cmd->add_option("--domains", sweep_paths, "domain JSONL files")->required()->expected(-2);
  sweep_cmd->add_option("--targets", sweep_targets, "restrict the target rotation");
  sweep_cmd->add_option("--min-size", min_size, "smallest combination size");
  sweep_cmd->add_option("--max-size", max_size, "largest combination size (0 = all)");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit combination weights from sweep records");
  std::string fit_records, fit_out;
  bool fit_per_target = false;
  FitConfig fit_config;
  fit_cmd->add_option("--records", fit_records, "records.csv from sweep")->required();
  fit_cmd->add_option("--out", fit_out, "weights JSON path (default <out-dir>/weights.json)");
  fit_cmd->add_flag("--per-target", fit_per_target,
                    "also fit leave-target-out weights per target");
  fit_cmd->add_option("--step", fit_config.step, "gradient step size");
  fit_cmd->add_option("--iterations", fit_config.iterations, "gradient iterations");

  // select
  auto* select_cmd = app.add_subcommand("select", "choose the best source combination");
  std::string select_weights, select_target;
  std::vector<std::string> select_paths;
  select_cmd->add_option("--weights", select_weights, "weights JSON from fit")->required();
  select_cmd->add_option("--domains", select_paths, "domain JSONL files")->required()->expected(-2);
  select_cmd->add_option("--target", select_target, "target domain name")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train on merged sources, write a checkpoint");
  std::vector<std::string> train_sources;
  std::string train_target;
  train_cmd->add_option("--sources", train_sources, "source domain files")->required()->expected(-1);
  train_cmd->add_option("--target", train_target,
                        "target domain file (vocabulary only; optional)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on target episodes");
  std::string eval_checkpoint, eval_target;
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint base path")->required();
  eval_cmd->add_option("--target", eval_target, "target domain file")->required();

  // matrices
  auto* loo_cmd = app.add_subcommand("loo-matrix", "leave-one-out F1 decrease matrix");
  std::vector<std::string> loo_paths;
  loo_cmd->add_option("--domains", loo_paths, "domain JSONL files")->required()->expected(-2);
  auto* single_cmd = app.add_subcommand("single-matrix", "single-source F1 matrix");
  std::vector<std::string> single_paths;
  single_cmd->add_option("--domains", single_paths, "domain JSONL files")->required()->expected(-2);

  // emit
  auto* emit_cmd = app.add_subcommand("emit", "figure-data CSVs from recorded results");
  std::string emit_kind, emit_records, emit_weights, emit_matrix;
  emit_cmd->add_option("--kind", emit_kind, "scatter|boxplot|heatmap|selector_compare")
      ->required();
  emit_cmd->add_option("--records", emit_records, "records.csv input");
  emit_cmd->add_option("--weights", emit_weights, "weights.json input");
  emit_cmd->add_option("--matrix", emit_matrix, "matrix CSV input (heatmap)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    TrainConfig train_config;
    ExperimentPlan plan;
    plan.jobs = jobs;
    if (!config_path.empty()) {
      apply_config(parse_config_file(config_path), train_config, &plan);
    }
    if (jobs != 0) plan.jobs = jobs;
    bench.seed = seed;

    if (app.got_subcommand(gen_cmd)) {
      fs::create_directories(out_dir);
      for (const Domain& domain : generate_benchmark(bench)) {
        const std::string path = (fs::path(out_dir) / (domain.name + ".jsonl")).string();
        save_domain(domain, path);
        std::cout << path << "\n";
      }
      return 0;
    }

    if (app.got_subcommand(sim_cmd)) {
      const std::vector<Domain> domains = load_domains(sim_paths);
      if (sim_out.empty()) {
        print_sim_csv(domains, plan.label_policy, std::cout);
      } else {
        std::ofstream out(sim_out);
        if (!out) throw ValidationError("cannot write " + sim_out);
        print_sim_csv(domains, plan.label_policy, out);
      }
      return 0;
    }

    if (app.got_subcommand(sweep_cmd)) {
      plan.universe = load_domains(sweep_paths);
      plan.targets = sweep_targets;
      plan.min_size = min_size;
      plan.max_size = max_size;
      plan.out_dir = out_dir;
      plan.train = train_config;
      const SweepOutcome outcome = sweep(plan);
      std::cout << "records: " << outcome.records.size() << " (new " << outcome.new_runs
                << ", resumed " << outcome.skipped_runs << ", failed "
                << outcome.failed_runs << ")\n"
                << (fs::path(out_dir) / "records.csv").string() << "\n";
      return outcome.failed_runs == 0 ? 0 : 3;
    }

    if (app.got_subcommand(fit_cmd)) {
      const std::vector<SweepRecord> records = read_records_csv(fit_records);
      const FitResult result = fit_weights(records, fit_config);
      if (fit_out.empty()) {
        fs::create_directories(out_dir);
        fit_out = (fs::path(out_dir) / "weights.json").string();
      }
      save_weights_json(result.weights, fit_out);
      if (fit_per_target) {
        nlohmann::json per_target = nlohmann::json::object();
        for (const auto& [target, weights] : fit_weights_per_target(records, fit_config)) {
          per_target[target] = {{"theta", weights.theta}, {"residual", weights.residual}};
        }
        const std::string path =
            (fs::path(fit_out).parent_path() / "weights_per_target.json").string();
        std::ofstream out(path);
        out << per_target.dump(2) << "\n";
        std::cout << path << "\n";
      }
      std::cout << fit_out << "\ntheta = [" << result.weights.theta[0] << ", "
                << result.weights.theta[1] << ", " << result.weights.theta[2]
                << "], residual = " << result.weights.residual << "\n";
      return 0;
    }

    if (app.got_subcommand(select_cmd)) {
      const CombinationWeights weights = load_weights_json(select_weights);
      const std::vector<Domain> domains = load_domains(select_paths);
      std::vector<Domain> sources;
      const Domain* target = nullptr;
      for (const Domain& d : domains) {
        if (d.name == select_target) {
          target = &d;
        } else {
          sources.push_back(d);
        }
      }
      if (!target) throw ValidationError("target \"" + select_target + "\" not among domains");
      const std::vector<Candidate> candidates =
          enumerate_candidates(sources, *target, domains, plan.label_policy);
      const Candidate& chosen = select_combination(candidates, weights);
      std::cout << join_combination(chosen.combination) << "\n";
      return 0;
    }

    if (app.got_subcommand(train_cmd)) {
      std::vector<Domain> sources = load_domains(train_sources);
      std::vector<Domain> vocab_domains = sources;
      if (!train_target.empty()) {
        vocab_domains.push_back(load_domain(train_target, fs::path(train_target).stem().string()));
      }
      const Domain merged = merge_domains(sources, "train");
      SpNetParams params =
          make_params(vocab_domains, train_config.hidden, seed, train_config.tau,
                      train_config.loss_weights, train_config.unknown_buckets);
      const std::vector<Episode> episodes =
          build_episodes(merged, train_config.k_shot, train_config.train_episodes, seed,
                         train_config.query_size);
      const TrainResult result = train(std::move(params), episodes, train_config);
      fs::create_directories(out_dir);
      const std::string base = (fs::path(out_dir) / "checkpoint").string();
      save_checkpoint(result.params, base);
      save_loss_log_csv(result.loss_log, (fs::path(out_dir) / "loss_log.csv").string());
      std::cout << base << ".bin\nsteps = " << result.loss_log.size()
                << ", final loss = " << result.loss_log.back() << "\n";
      return 0;
    }

    if (app.got_subcommand(eval_cmd)) {
      const SpNetParams params = load_checkpoint(eval_checkpoint);
      const Domain target = load_domain(eval_target, fs::path(eval_target).stem().string());
      const std::vector<Episode> episodes =
          build_episodes(target, train_config.k_shot, train_config.eval_episodes,
                         mix_seed(seed, fnv1a64("eval")), train_config.query_size);
      const EvalResult result = evaluate(params, episodes, train_config);
      std::printf("precision = %.4f\nrecall = %.4f\nf1 = %.4f\n", result.precision,
                  result.recall, result.f1);
      return 0;
    }

    if (app.got_subcommand(loo_cmd) || app.got_subcommand(single_cmd)) {
      plan.universe = load_domains(app.got_subcommand(loo_cmd) ? loo_paths : single_paths);
      plan.out_dir = out_dir;
      plan.train = train_config;
      const bool loo = app.got_subcommand(loo_cmd);
      const MatrixResult matrix = loo ? leave_one_out_matrix(plan) : single_source_matrix(plan);
      const fs::path dir = fs::path(out_dir) / "matrices";
      fs::create_directories(dir);
      const std::string prefix = loo ? "loo" : "single";
      save_matrix_csv(matrix, (dir / (prefix + "_mean.csv")).string(),
                      (dir / (prefix + "_std.csv")).string());
      std::cout << (dir / (prefix + "_mean.csv")).string() << "\n";
      return 0;
    }

    if (app.got_subcommand(emit_cmd)) {
      const fs::path figures = fs::path(out_dir) / "figures";
      fs::create_directories(figures);
      if (emit_kind == "scatter") {
        if (emit_records.empty()) throw ValidationError("emit scatter: --records required");
        emit_scatter(emit_records, emit_weights, figures.string());
        std::cout << (figures / "scatter_tvc.csv").string() << "\n";
      } else if (emit_kind == "boxplot") {
        if (emit_records.empty()) throw ValidationError("emit boxplot: --records required");
        emit_boxplot(emit_records, (figures / "boxplot.csv").string());
        std::cout << (figures / "boxplot.csv").string() << "\n";
      } else if (emit_kind == "heatmap") {
        if (emit_matrix.empty()) throw ValidationError("emit heatmap: --matrix required");
        emit_heatmap(emit_matrix, (figures / "heatmap.csv").string());
        std::cout << (figures / "heatmap.csv").string() << "\n";
      } else if (emit_kind == "selector_compare") {
        if (emit_records.empty() || emit_weights.empty()) {
          throw ValidationError("emit selector_compare: --records and --weights required");
        }
        emit_selector_compare(emit_records, emit_weights,
                              (figures / "selector_compare.csv").string());
        std::cout << (figures / "selector_compare.csv").string() << "\n";
      } else {
        throw ValidationError("emit: unknown kind \"" + emit_kind + "\"");
      }
      return 0;
    }

    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
}
