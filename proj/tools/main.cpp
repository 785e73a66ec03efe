#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <torch/torch.h>

#include "commands.hpp"

using namespace objgan;

int main(int argc, char** argv) {
  CLI::App app{"objgan: objective-driven GAN experiments"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  cli::GlobalOptions global;
  std::uint64_t seed = 0;
  std::string out;
  app.add_option("--config", global.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
  auto* out_opt = app.add_option("--out", out, "output directory (overrides the config)");
  int threads = 1;
  app.add_option("--threads", threads, "intra-op threads")->check(CLI::PositiveNumber);

  auto* train_aml = app.add_subcommand("train-aml", "train a money-laundering flow generator");
  auto* train_recsys = app.add_subcommand("train-recsys", "train a recommender injection-profile generator");

  auto* theory_sim = app.add_subcommand("theory-sim", "simulate the Gaussian toy gradient flow");
  cli::TheoryOptions theory;
  theory_sim->add_option("--alpha", theory.alpha, "objective weight")->check(CLI::Range(0.0, 1.0));
  theory_sim->add_option("--mu-d", theory.mu_d, "data mean");
  theory_sim->add_option("--k", theory.k, "2 (sigma_g^2 + sigma_d^2)")->check(CLI::PositiveNumber);
  theory_sim->add_option("--eta", theory.eta, "step size")->check(CLI::PositiveNumber);
  theory_sim->add_option("--steps", theory.steps, "Euler steps")->check(CLI::NonNegativeNumber);
  theory_sim->add_option("--mu-g0", theory.mu_g0, "initial generator mean");
  theory_sim->add_option("--tolerance", theory.tolerance, "convergence tolerance")->check(CLI::PositiveNumber);

  std::vector<std::string> runs;
  std::vector<std::int64_t> sizes{30, 60, 120};
  auto* attack_eval = app.add_subcommand("attack-eval", "count users reached by generated and baseline injections");
  attack_eval->add_option("--run", runs, "train-recsys output directory (repeatable)")->required()->check(CLI::ExistingDirectory);
  attack_eval->add_option("--sizes", sizes, "injection sizes")->delimiter(',')->check(CLI::PositiveNumber);

  auto* detect_eval = app.add_subcommand("detect-eval", "retrain a detector on mixed generated and real flows");
  detect_eval->add_option("--run", runs, "train-aml output directory (repeatable)")->required()->check(CLI::ExistingDirectory);

  int trials = 20;
  std::string use_case = "aml";
  auto* hpsearch = app.add_subcommand("hpsearch", "random hyperparameter search");
  hpsearch->add_option("--trials", trials, "number of trials")->check(CLI::Range(1, 1000000));
  hpsearch->add_option("--use-case", use_case, "aml, recsys or theory (when the config does not say)")
      ->check(CLI::IsMember({"aml", "recsys", "theory"}));

  std::string kind;
  std::vector<std::string> inputs;
  auto* report = app.add_subcommand("report", "aggregate results into report tables");
  report->add_option("--kind", kind, "aml_detection, rs_attack or theory_phase")
      ->required()
      ->check(CLI::IsMember({"aml_detection", "rs_attack", "theory_phase"}));
  report->add_option("--input", inputs, "result directory (repeatable)")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  torch::set_num_threads(threads);
  if (*seed_opt) global.seed = seed;
  if (*out_opt) global.out = out;

  try {
    if (*train_aml) {
      cli::train_aml_command(cli::resolve_config(harness::UseCase::Aml, global));
    } else if (*train_recsys) {
      cli::train_recsys_command(cli::resolve_config(harness::UseCase::Recsys, global));
    } else if (*theory_sim) {
      cli::theory_sim_command(cli::resolve_config(harness::UseCase::Theory, global), theory);
    } else if (*attack_eval) {
      cli::attack_eval_command(runs, sizes, cli::resolve_config(harness::UseCase::Recsys, global).output_dir);
    } else if (*detect_eval) {
      auto c = cli::resolve_config(harness::UseCase::Aml, global);
      cli::detect_eval_command(runs, c.seed, c.output_dir);
    } else if (*hpsearch) {
      auto uc = harness::parse_use_case(use_case);
      if (!global.config_path.empty()) uc = harness::load_config(global.config_path).use_case;
      cli::hpsearch_command(cli::resolve_config(uc, global), trials);
    } else if (*report) {
      auto uc = kind == "theory_phase" ? harness::UseCase::Theory
                                       : (kind == "rs_attack" ? harness::UseCase::Recsys : harness::UseCase::Aml);
      cli::report_command(kind, inputs, cli::resolve_config(uc, global));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
