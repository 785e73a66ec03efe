#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "objgan/aml/evaluation.hpp"
#include "objgan/aml/experiment.hpp"
#include "objgan/aml/rules.hpp"
#include "objgan/aml/synthetic.hpp"
#include "objgan/checkpoint.hpp"
#include "objgan/detection_metrics.hpp"
#include "objgan/harness/report.hpp"
#include "objgan/recsys/attacks.hpp"
#include "objgan/recsys/experiment.hpp"
#include "objgan/recsys/ratings.hpp"
#include "objgan/theory_toy.hpp"

namespace objgan::cli {

using harness::ExperimentConfig;
using harness::Range;
using harness::TrialOutcome;
using harness::UseCase;

namespace {

// Legitimate AML data and the default ratings do not depend on the run seed,
// so runs with different seeds see the same data.
constexpr std::uint64_t kAmlDataSeed = 2024;
constexpr std::uint64_t kRatingsSeed = 0;

ExperimentConfig desk_defaults(UseCase use_case) {
  ExperimentConfig c;
  c.use_case = use_case;
  switch (use_case) {
    case UseCase::Aml: {
      const auto a = aml::AmlExperimentConfig::desk_scale();
      c.alpha = Range::fixed(a.weights.alpha);
      c.beta = Range::fixed(a.weights.beta);
      c.gamma = Range::fixed(a.weights.gamma);
      c.learning_rate = Range::fixed(a.train.learning_rate);
      c.epochs = a.train.epochs;
      c.batch_size = a.train.batch_size;
      c.critic_steps = a.train.critic_steps_per_generator_step;
      c.generator_steps_per_epoch = a.train.generator_steps_per_epoch;
      c.gradient_penalty = a.train.gradient_penalty_coefficient;
      c.accounts = a.data.accounts;
      break;
    }
    case UseCase::Recsys: {
      const auto r = recsys::RecsysExperimentConfig::desk_scale();
      c.alpha = Range::fixed(r.alpha);
      c.beta = Range::fixed(1.0 - r.alpha);
      c.gamma = Range::fixed(0.0);
      c.learning_rate = Range::fixed(r.train.learning_rate);
      c.epochs = r.train.epochs;
      c.batch_size = static_cast<int>(r.generator.group_size);
      c.critic_steps = r.train.critic_steps_per_generator_step;
      c.generator_steps_per_epoch = r.train.generator_steps_per_epoch;
      c.gradient_penalty = r.train.gradient_penalty_coefficient;
      c.neighbors = r.recommender.neighbor_count;
      c.top_n = r.recommender.top_n;
      c.group_size = r.generator.group_size;
      c.objective_users = r.objective_users;
      break;
    }
    case UseCase::Theory:
      c.alpha = Range::fixed(0.5);
      c.beta = Range::fixed(0.5);
      c.gamma = Range::fixed(0.0);
      break;
  }
  return c;
}

void require_fixed(const ExperimentConfig& c) {
  for (const auto* r : {&c.alpha, &c.beta, &c.gamma, &c.learning_rate}) {
    if (r->ranged()) throw std::invalid_argument("ranged hyperparameters are only accepted by hpsearch");
  }
}

std::filesystem::path out_dir(const ExperimentConfig& c) {
  std::filesystem::path dir(c.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_log(const std::filesystem::path& path, const std::vector<MetricRecord>& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : log) out << to_log_line(r) << '\n';
}

void print_metrics(const std::map<std::string, double>& metrics) {
  for (const auto& [name, value] : metrics) std::printf("%s %.6g\n", name.c_str(), value);
}

// ---------------------------------------------------------------- aml

aml::AmlExperimentConfig aml_config(const ExperimentConfig& c) {
  auto a = aml::AmlExperimentConfig::desk_scale();
  a.weights = {c.alpha.low, c.beta.low, c.gamma.low};
  a.train.learning_rate = c.learning_rate.low;
  a.train.epochs = c.epochs;
  a.train.batch_size = c.batch_size;
  a.train.critic_steps_per_generator_step = c.critic_steps;
  a.train.generator_steps_per_epoch = c.generator_steps_per_epoch;
  a.train.gradient_penalty_coefficient = c.gradient_penalty;
  a.train.seed = c.seed;
  a.data.accounts = c.accounts;
  if (!c.rules_path.empty()) a.rules = aml::load_rule_config(c.rules_path);
  if (!c.flows_path.empty()) a.data.shape = aml::read_flow_dataset(c.flows_path).shape;
  a.sync_shapes();
  return a;
}

torch::Tensor legit_flows(const ExperimentConfig& c, const aml::AmlExperimentConfig& a) {
  if (!c.flows_path.empty()) return aml::read_flow_dataset(c.flows_path).amounts;
  return aml::synth_legit_data(a.data, kAmlDataSeed).stacked_amounts();
}

aml::AmlGenerator load_aml_generator(const std::filesystem::path& run, ExperimentConfig& c) {
  c = harness::load_config(run / "config.json");
  auto a = aml_config(c);
  aml::AmlGenerator g(a.generator);
  load_checkpoint(run / "generator.ckpt", *g, harness::config_digest(c));
  return g;
}

// ---------------------------------------------------------------- recsys

recsys::RatingsMatrix load_ratings(const ExperimentConfig& c) {
  if (!c.ratings_path.empty()) return recsys::load_movielens(c.ratings_path);
  if (const char* env = std::getenv("OBJGAN_ML1M")) return recsys::load_movielens(env);
  return recsys::synth_ratings(recsys::SyntheticRatingsConfig{}, kRatingsSeed);
}

recsys::RecsysExperimentConfig recsys_config(const ExperimentConfig& c, std::int64_t items) {
  if (std::abs(c.alpha.low + c.beta.low - 1.0) > 1e-12) throw std::invalid_argument("recsys runs need beta = 1 - alpha");
  if (c.gamma.low != 0.0) throw std::invalid_argument("recsys runs have no alert system; gamma must be 0");
  auto r = recsys::RecsysExperimentConfig::desk_scale();
  r.alpha = c.alpha.low;
  r.train.learning_rate = c.learning_rate.low;
  r.train.epochs = c.epochs;
  r.train.critic_steps_per_generator_step = c.critic_steps;
  r.train.generator_steps_per_epoch = c.generator_steps_per_epoch;
  r.train.gradient_penalty_coefficient = c.gradient_penalty;
  r.train.seed = c.seed;
  r.generator.group_size = c.group_size;
  r.objective_users = c.objective_users;
  r.recommender.neighbor_count = c.neighbors;
  r.recommender.top_n = c.top_n;
  r.recommender.target_item = c.target_item;
  r.sync(items);
  return r;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<harness::AttackCounts> read_attack_table(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path.string() + " is empty");
  const auto header = split_csv_line(lines.front());
  std::vector<std::int64_t> sizes;
  for (std::size_t i = 1; i < header.size(); ++i) sizes.push_back(std::stoll(header[i]));
  std::vector<harness::AttackCounts> out;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split_csv_line(lines[l]);
    if (cells.size() != header.size()) throw std::runtime_error(path.string() + ": ragged row");
    harness::AttackCounts c{cells[0], sizes, {}};
    for (std::size_t i = 1; i < cells.size(); ++i) c.affected.push_back(std::stod(cells[i]));
    out.push_back(std::move(c));
  }
  return out;
}

aml::DetectionReport read_detection_table(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.size() != 4) throw std::runtime_error(path.string() + ": expected three detection rows");
  aml::DetectionReport r;
  aml::DetectionRow* rows[] = {&r.rules, &r.model, &r.combined};
  for (int i = 0; i < 3; ++i) {
    const auto cells = split_csv_line(lines[static_cast<std::size_t>(i + 1)]);
    if (cells.size() != 4) throw std::runtime_error(path.string() + ": malformed row");
    *rows[i] = {cells[0], std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]), 0, 0};
  }
  return r;
}

}  // namespace

ExperimentConfig resolve_config(UseCase use_case, const GlobalOptions& global) {
  auto merged = nlohmann::json::parse(harness::to_json(desk_defaults(use_case)));
  if (!global.config_path.empty()) {
    std::ifstream in(global.config_path);
    if (!in) throw std::runtime_error("cannot open config " + global.config_path);
    nlohmann::json file;
    try {
      in >> file;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!file.is_object()) throw std::invalid_argument("config must be a JSON object");
    if (file.contains("use_case") && file["use_case"] != harness::to_string(use_case)) {
      throw std::invalid_argument("config use_case '" + file["use_case"].dump() + "' does not match the command");
    }
    for (const auto& [key, value] : file.items()) merged[key] = value;
  }
  auto c = harness::parse_config(merged.dump());
  if (global.seed) c.seed = *global.seed;
  if (global.out) c.output_dir = *global.out;
  c.validate();
  return c;
}

TrialOutcome train_aml_command(const ExperimentConfig& config) {
  require_fixed(config);
  const auto a = aml_config(config);
  const auto legit = legit_flows(config, a);
  const auto dir = out_dir(config);
  const auto digest = harness::config_digest(config);
  write_text(dir / "config.json", harness::to_json(config) + "\n");

  auto run = aml::train_aml(a, legit);
  write_log(dir / "metrics.jsonl", run.log);
  save_checkpoint(dir / "generator.ckpt", *run.generator, digest);
  save_checkpoint(dir / "discriminator.ckpt", *run.discriminator, digest);

  auto flows = aml::sample_flows(run.generator, 1000, config.seed + 1);
  const auto legit_stats = aml::flow_stats(legit);
  const auto gen_stats = aml::flow_stats(flows);
  TrialOutcome out;
  out.metrics["throughput_ratio"] = gen_stats.mean_account_throughput / legit_stats.mean_account_throughput;
  out.metrics["alerted_fraction"] = aml::sample_alerted(flows, a.rules).to(torch::kFloat64).mean().item<double>();
  out.metrics["legit_alerted_fraction"] = aml::sample_alerted(legit, a.rules).to(torch::kFloat64).mean().item<double>();
  out.metrics["disc_auc"] = run.log.back().disc_auc;
  out.checkpoints = {(dir / "generator.ckpt").string(), (dir / "discriminator.ckpt").string()};
  print_metrics(out.metrics);
  return out;
}

TrialOutcome train_recsys_command(const ExperimentConfig& input) {
  require_fixed(input);
  auto config = input;
  const auto ratings = load_ratings(config);
  if (config.target_item < 0) config.target_item = recsys::choose_target_item(ratings, config.seed);
  const auto r = recsys_config(config, ratings.items());
  const auto dir = out_dir(config);
  const auto digest = harness::config_digest(config);
  write_text(dir / "config.json", harness::to_json(config) + "\n");

  auto run = recsys::train_recsys(r, ratings);
  write_log(dir / "metrics.jsonl", run.log);
  save_checkpoint(dir / "generator.ckpt", *run.generator, digest);
  save_checkpoint(dir / "discriminator.ckpt", *run.discriminator, digest);

  recsys::AttackEvaluator evaluator(ratings, r.recommender);
  auto profiles = recsys::generated_profiles(run.generator, 30, config.seed + 1);
  recsys::AttackProfileBatch attack{profiles, (profiles > 0).to(torch::kFloat32), 30, {}};
  TrialOutcome out;
  out.metrics["target_item"] = static_cast<double>(config.target_item);
  out.metrics["affected_at_30"] = static_cast<double>(evaluator.affected_users(attack, 30));
  out.metrics["disc_auc"] = run.log.back().disc_auc;
  out.checkpoints = {(dir / "generator.ckpt").string(), (dir / "discriminator.ckpt").string()};
  print_metrics(out.metrics);
  return out;
}

TrialOutcome theory_sim_command(ExperimentConfig config, const TheoryOptions& options) {
  if (options.alpha) config.alpha = Range::fixed(*options.alpha);
  if (options.mu_d) config.mu_d = *options.mu_d;
  if (options.k) config.k = *options.k;
  if (options.eta) config.eta = *options.eta;
  if (options.steps) config.steps = *options.steps;
  require_fixed(config);
  config.validate();
  auto p = theory::GaussianToyParams::from_k(config.mu_d, config.k, config.alpha.low, config.eta);
  p.mu_g = options.mu_g0;

  TrialOutcome out;
  const auto dir = out_dir(config);
  write_text(dir / "config.json", harness::to_json(config) + "\n");
  if (p.alpha < 1.0) {
    const double fp = theory::fixed_point(p);
    std::printf("fixed point: %.10g\n", fp);
    out.metrics["fixed_point"] = fp;
  } else {
    std::printf("fixed point: inf\n");
  }
  auto traj = theory::simulate_flow(p, config.steps, options.tolerance);
  std::ofstream csv(dir / "trajectory.csv");
  theory::write_trajectory_csv(csv, traj);
  std::printf("final mu_g: %.10g\n", traj.mu_g_values.back());
  if (traj.steps_to_converge >= 0) {
    std::printf("steps to converge: %ld\n", traj.steps_to_converge);
  } else {
    std::printf("steps to converge: not reached in %ld steps\n", config.steps);
  }
  out.metrics["final_mu_g"] = traj.mu_g_values.back();
  out.metrics["steps_to_converge"] = static_cast<double>(traj.steps_to_converge);
  return out;
}

void attack_eval_command(const std::vector<std::string>& runs, const std::vector<std::int64_t>& sizes,
                         const std::filesystem::path& out) {
  if (runs.empty()) throw std::invalid_argument("attack-eval needs at least one --run directory");
  const std::int64_t largest = *std::max_element(sizes.begin(), sizes.end());
  std::vector<harness::AttackCounts> table;
  for (const auto& run_dir : runs) {
    auto c = harness::load_config(std::filesystem::path(run_dir) / "config.json");
    const auto ratings = load_ratings(c);
    const auto r = recsys_config(c, ratings.items());
    recsys::ProfileGenerator g(r.generator);
    load_checkpoint(std::filesystem::path(run_dir) / "generator.ckpt", *g, harness::config_digest(c));
    recsys::AttackEvaluator evaluator(ratings, r.recommender);
    const auto stats = recsys::item_stats(ratings);

    auto profiles = recsys::generated_profiles(g, largest, c.seed + 1);
    recsys::AttackProfileBatch gan{profiles, (profiles > 0).to(torch::kFloat32), largest, {}};
    harness::AttackCounts row{"GAN", sizes, {}};
    for (auto n : sizes) row.affected.push_back(static_cast<double>(evaluator.affected_users(gan, n)));
    table.push_back(row);

    const std::pair<recsys::BaselineKind, const char*> kinds[] = {{recsys::BaselineKind::TargetOnly, "Target only"},
                                                                  {recsys::BaselineKind::Random, "Random"},
                                                                  {recsys::BaselineKind::HighestRated, "Highest rated"},
                                                                  {recsys::BaselineKind::MostRated, "Most rated"}};
    for (const auto& [kind, name] : kinds) {
      auto batch = recsys::baseline_attack(kind, largest, c.target_item, stats, c.seed);
      harness::AttackCounts b{name, sizes, {}};
      for (auto n : sizes) b.affected.push_back(static_cast<double>(evaluator.affected_users(batch, n)));
      table.push_back(b);
    }
  }
  harness::ReportData data;
  data.attacks = table;
  std::filesystem::create_directories(out);
  harness::emit_report(data, harness::ReportKind::RsAttack, out);
  harness::write_attack_table(std::cout, table);
}

void detect_eval_command(const std::vector<std::string>& runs, std::uint64_t seed, const std::filesystem::path& out) {
  if (runs.empty()) throw std::invalid_argument("detect-eval needs at least one --run directory");
  std::vector<aml::SyntheticSource> sources;
  ExperimentConfig first;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    ExperimentConfig c;
    auto g = load_aml_generator(runs[i], c);
    if (i == 0) first = c;
    const std::uint64_t sample_seed = seed * 1000 + i;
    sources.push_back({runs[i], [g, sample_seed](std::int64_t n) mutable { return aml::sample_flows(g, n, sample_seed); }});
  }
  const auto a = aml_config(first);
  const auto legit = legit_flows(first, a);
  auto mixed = aml::build_mixed_dataset_ratio(sources, legit, 1.0);
  auto [train, test] = aml::split_dataset(mixed, 0.2, seed);
  aml::DetectorTrainConfig options;
  options.seed = seed;
  auto detector = aml::train_detector(a.discriminator, train, options);
  auto scores_t = aml::detector_scores(detector, test.amounts).to(torch::kFloat64).contiguous();
  std::vector<double> scores(scores_t.data_ptr<double>(), scores_t.data_ptr<double>() + scores_t.numel());
  const auto metrics = evaluate_discriminator(scores, test.labels, 0.0);
  std::printf("accuracy %.6g\nauc %.6g\n", metrics.accuracy, metrics.auc.value_or(0.5));

  harness::ReportData data;
  data.detection.push_back(aml::evaluate_detection(
      a.rules, [&](const torch::Tensor& x) { return aml::detector_scores(detector, x); }, test));
  const auto n = std::min<std::int64_t>(1000, legit.size(0));
  data.real_flows = legit.narrow(0, 0, n);
  data.generated_flows = sources.front().sample(n);
  std::filesystem::create_directories(out);
  harness::emit_report(data, harness::ReportKind::AmlDetection, out);
  harness::write_detection_table(std::cout, data.detection);
}

void hpsearch_command(const ExperimentConfig& config, int trials) {
  auto space = config;
  const auto defaults = harness::default_search_space(config.use_case);
  // Hyperparameters left fixed take the default search ranges.
  if (!space.alpha.ranged()) space.alpha = defaults.alpha;
  if (!space.beta.ranged()) space.beta = defaults.beta;
  if (!space.gamma.ranged()) space.gamma = defaults.gamma;
  if (!space.learning_rate.ranged()) space.learning_rate = defaults.learning_rate;
  const auto root = out_dir(config);
  harness::RunRegistry registry(root / "runs.jsonl");
  harness::TrialFn trial = [&](const ExperimentConfig& resolved, const std::string& run_id) {
    auto c = resolved;
    c.output_dir = (root / run_id).string();
    std::printf("trial %s\n", run_id.c_str());
    switch (c.use_case) {
      case UseCase::Aml:
        return train_aml_command(c);
      case UseCase::Recsys:
        return train_recsys_command(c);
      case UseCase::Theory:
        return theory_sim_command(c, {});
    }
    throw std::logic_error("unhandled use case");
  };
  auto records = harness::random_search(space, trials, trial, &registry);
  int crashed = 0;
  for (const auto& r : records) crashed += r.status != "ok";
  std::printf("%zu trials, %d crashed, registry %s\n", records.size(), crashed, registry.path().c_str());
}

void report_command(const std::string& kind_name, const std::vector<std::string>& inputs, const ExperimentConfig& config) {
  const auto kind = harness::parse_report_kind(kind_name);
  harness::ReportData data;
  switch (kind) {
    case harness::ReportKind::RsAttack:
      for (const auto& dir : inputs) {
        auto rows = read_attack_table(std::filesystem::path(dir) / "rs_attack.csv");
        data.attacks.insert(data.attacks.end(), rows.begin(), rows.end());
      }
      break;
    case harness::ReportKind::AmlDetection:
      for (const auto& dir : inputs) data.detection.push_back(read_detection_table(std::filesystem::path(dir) / "aml_detection.csv"));
      break;
    case harness::ReportKind::TheoryPhase:
      if (inputs.empty()) {
        std::vector<double> alphas, mus;
        for (int i = 0; i <= 20; ++i) alphas.push_back(i / 20.0);
        for (int i = 0; i <= 40; ++i) mus.push_back(config.mu_d - 10.0 + i);
        auto p = theory::GaussianToyParams::from_k(config.mu_d, config.k, 0.0, config.eta);
        data.phases.push_back(theory::phase_portrait(mus, alphas, p));
      }
      for (const auto& dir : inputs) {
        std::ifstream in(std::filesystem::path(dir) / "theory_phase.csv");
        if (!in) throw std::runtime_error("cannot open " + dir + "/theory_phase.csv");
        data.phases.push_back(theory::read_phase_csv(in));
      }
      break;
  }
  const auto dir = out_dir(config);
  for (const auto& path : harness::emit_report(data, kind, dir)) std::printf("wrote %s\n", path.c_str());
}

}  // namespace objgan::cli
