#include "objgan/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "objgan/harness/digest.hpp"

namespace objgan::harness {

using nlohmann::json;

std::string to_string(UseCase u) {
  switch (u) {
    case UseCase::Aml:
      return "aml";
    case UseCase::Recsys:
      return "recsys";
    case UseCase::Theory:
      return "theory";
  }
  return "aml";
}

UseCase parse_use_case(const std::string& s) {
  if (s == "aml") return UseCase::Aml;
  if (s == "recsys") return UseCase::Recsys;
  if (s == "theory") return UseCase::Theory;
  throw std::invalid_argument("unknown use_case '" + s + "' (expected aml, recsys or theory)");
}

namespace {

void check_range(const char* name, const Range& r, bool positive) {
  if (!std::isfinite(r.low) || !std::isfinite(r.high)) throw std::invalid_argument(std::string(name) + ": not finite");
  if (r.low > r.high) throw std::invalid_argument(std::string(name) + ": range low exceeds high");
  if (positive && r.ranged() && r.low <= 0.0) {
    throw std::invalid_argument(std::string(name) + ": ranged values must be positive for log-uniform sampling");
  }
  if (r.low < 0.0) throw std::invalid_argument(std::string(name) + ": must be nonnegative");
}

Range range_from(const json& v, const std::string& key) {
  if (v.is_number()) return Range::fixed(v.get<double>());
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw std::invalid_argument("config key '" + key + "' must be a number or [low, high]");
}

json range_to(const Range& r) {
  if (!r.ranged()) return r.low;
  return json::array({r.low, r.high});
}

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  check_range("alpha", alpha, true);
  check_range("beta", beta, true);
  check_range("gamma", gamma, true);
  check_range("learning_rate", learning_rate, true);
  if (learning_rate.low <= 0.0) throw std::invalid_argument("learning_rate must be positive");
  if (use_case == UseCase::Recsys && alpha.high > 1.0) throw std::invalid_argument("recsys alpha must lie in [0, 1]");
  if (use_case == UseCase::Theory && (alpha.low < 0.0 || alpha.high > 1.0)) {
    throw std::invalid_argument("theory alpha must lie in [0, 1]");
  }
  if (epochs < 1 || batch_size < 1 || critic_steps < 1 || generator_steps_per_epoch < 0) {
    throw std::invalid_argument("training counts must be positive");
  }
  if (gradient_penalty < 0.0) throw std::invalid_argument("gradient_penalty must be nonnegative");
  if (accounts < 1) throw std::invalid_argument("accounts must be positive");
  if (neighbors < 0 || top_n < 1 || group_size < 1 || objective_users < 0) {
    throw std::invalid_argument("recommender sizes must be positive");
  }
  if (target_item < -1) throw std::invalid_argument("target_item must be -1 or an item index");
  if (!(k > 0.0) || !(eta > 0.0) || steps < 0) throw std::invalid_argument("theory parameters out of range");
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "use_case") c.use_case = parse_use_case(get_as<std::string>(v, key));
    else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
    else if (key == "output_dir") c.output_dir = get_as<std::string>(v, key);
    else if (key == "alpha") c.alpha = range_from(v, key);
    else if (key == "beta") c.beta = range_from(v, key);
    else if (key == "gamma") c.gamma = range_from(v, key);
    else if (key == "learning_rate") c.learning_rate = range_from(v, key);
    else if (key == "epochs") c.epochs = get_as<int>(v, key);
    else if (key == "batch_size") c.batch_size = get_as<int>(v, key);
    else if (key == "critic_steps") c.critic_steps = get_as<int>(v, key);
    else if (key == "generator_steps_per_epoch") c.generator_steps_per_epoch = get_as<int>(v, key);
    else if (key == "gradient_penalty") c.gradient_penalty = get_as<double>(v, key);
    else if (key == "flows_path") c.flows_path = get_as<std::string>(v, key);
    else if (key == "accounts") c.accounts = get_as<std::int64_t>(v, key);
    else if (key == "rules_path") c.rules_path = get_as<std::string>(v, key);
    else if (key == "ratings_path") c.ratings_path = get_as<std::string>(v, key);
    else if (key == "target_item") c.target_item = get_as<std::int64_t>(v, key);
    else if (key == "neighbors") c.neighbors = get_as<std::int64_t>(v, key);
    else if (key == "top_n") c.top_n = get_as<std::int64_t>(v, key);
    else if (key == "group_size") c.group_size = get_as<std::int64_t>(v, key);
    else if (key == "objective_users") c.objective_users = get_as<std::int64_t>(v, key);
    else if (key == "mu_d") c.mu_d = get_as<double>(v, key);
    else if (key == "k") c.k = get_as<double>(v, key);
    else if (key == "eta") c.eta = get_as<double>(v, key);
    else if (key == "steps") c.steps = get_as<long>(v, key);
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& c) {
  json j;  // std::map-backed, so keys come out sorted
  j["use_case"] = to_string(c.use_case);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["alpha"] = range_to(c.alpha);
  j["beta"] = range_to(c.beta);
  j["gamma"] = range_to(c.gamma);
  j["learning_rate"] = range_to(c.learning_rate);
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["critic_steps"] = c.critic_steps;
  j["generator_steps_per_epoch"] = c.generator_steps_per_epoch;
  j["gradient_penalty"] = c.gradient_penalty;
  j["flows_path"] = c.flows_path;
  j["accounts"] = c.accounts;
  j["rules_path"] = c.rules_path;
  j["ratings_path"] = c.ratings_path;
  j["target_item"] = c.target_item;
  j["neighbors"] = c.neighbors;
  j["top_n"] = c.top_n;
  j["group_size"] = c.group_size;
  j["objective_users"] = c.objective_users;
  j["mu_d"] = c.mu_d;
  j["k"] = c.k;
  j["eta"] = c.eta;
  j["steps"] = c.steps;
  return j.dump();
}

std::string config_digest(const ExperimentConfig& config) { return blake2b_hex(to_json(config)); }

}  // namespace objgan::harness
