#include "objgan/harness/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace objgan::harness {

using nlohmann::json;

std::string to_json_line(const RunRecord& r) {
  json j;
  j["run_id"] = r.run_id;
  j["status"] = r.status;
  j["error"] = r.error;
  j["config_digest"] = r.config_digest;
  j["seed"] = r.seed;
  j["hyperparameters"] = r.hyperparameters;
  j["metrics"] = r.metrics;
  j["checkpoints"] = r.checkpoints;
  return j.dump();
}

RunRecord parse_run_record(const std::string& line) {
  const auto j = json::parse(line);
  RunRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.error = j.value("error", "");
  r.config_digest = j.value("config_digest", "");
  r.seed = j.value("seed", std::uint64_t{0});
  r.hyperparameters = j.at("hyperparameters").get<std::map<std::string, double>>();
  r.metrics = j.at("metrics").get<std::map<std::string, double>>();
  r.checkpoints = j.value("checkpoints", std::vector<std::string>{});
  return r;
}

RunRegistry::RunRegistry(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

std::vector<RunRecord> RunRegistry::load() const {
  std::vector<RunRecord> out;
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_run_record(line));
  }
  return out;
}

bool RunRegistry::contains(const std::string& run_id) const {
  for (const auto& r : load()) {
    if (r.run_id == run_id) return true;
  }
  return false;
}

void RunRegistry::append(const RunRecord& record) {
  if (record.run_id.empty()) throw std::invalid_argument("run record needs an id");
  if (contains(record.run_id)) throw std::invalid_argument("run id '" + record.run_id + "' already registered");
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to registry " + path_.string());
  out << to_json_line(record) << '\n';
}

ExperimentConfig default_search_space(UseCase use_case) {
  ExperimentConfig c;
  c.use_case = use_case;
  if (use_case == UseCase::Recsys) {
    c.alpha = {1e-5, 1.0};
    c.beta = Range::fixed(0.0);
    c.gamma = Range::fixed(0.0);
    c.learning_rate = {1e-5, 3e-4};
  } else {
    c.alpha = Range::fixed(1.0);
    c.beta = {1e2, 1e5};
    c.gamma = {1e3, 4e3};
    c.learning_rate = {1e-4, 3e-3};
  }
  return c;
}

namespace {

double log_uniform(const Range& r, std::mt19937_64& rng) {
  if (!r.ranged()) return r.low;
  std::uniform_real_distribution<double> u(std::log(r.low), std::log(r.high));
  return std::clamp(std::exp(u(rng)), r.low, r.high);
}

}  // namespace

ExperimentConfig sample_trial(const ExperimentConfig& space, std::mt19937_64& rng) {
  auto c = space;
  c.alpha = Range::fixed(log_uniform(space.alpha, rng));
  c.beta = Range::fixed(log_uniform(space.beta, rng));
  c.gamma = Range::fixed(log_uniform(space.gamma, rng));
  c.learning_rate = Range::fixed(log_uniform(space.learning_rate, rng));
  if (c.use_case == UseCase::Aml) c.alpha = Range::fixed(1.0);
  if (c.use_case == UseCase::Recsys) {
    c.beta = Range::fixed(1.0 - c.alpha.low);
    c.gamma = Range::fixed(0.0);
  }
  c.seed = rng();
  return c;
}

std::vector<RunRecord> random_search(const ExperimentConfig& space, int n_trials, const TrialFn& trial,
                                     RunRegistry* registry) {
  if (n_trials < 1) throw std::invalid_argument("random_search: n_trials must be >= 1");
  space.validate();
  std::mt19937_64 rng(space.seed);
  std::vector<RunRecord> records;
  for (int t = 0; t < n_trials; ++t) {
    auto resolved = sample_trial(space, rng);
    RunRecord r;
    char id[64];
    std::snprintf(id, sizeof id, "%s-%016llx-%03d", to_string(space.use_case).c_str(),
                  static_cast<unsigned long long>(space.seed), t);
    r.run_id = id;
    r.seed = resolved.seed;
    r.config_digest = config_digest(resolved);
    r.hyperparameters = {{"alpha", resolved.alpha.low},
                         {"beta", resolved.beta.low},
                         {"gamma", resolved.gamma.low},
                         {"learning_rate", resolved.learning_rate.low}};
    try {
      auto outcome = trial(resolved, r.run_id);
      r.metrics = std::move(outcome.metrics);
      r.checkpoints = std::move(outcome.checkpoints);
    } catch (const std::exception& e) {
      r.status = "crashed";
      r.error = e.what();
    }
    if (registry) registry->append(r);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace objgan::harness
