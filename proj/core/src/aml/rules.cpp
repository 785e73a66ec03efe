#include "objgan/aml/rules.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace objgan::aml {

void RuleConfig::validate() const {
  for (int w : {w1, w2, w3, w4, w5}) {
    if (w < 1) throw std::invalid_argument("rule window spans must be >= 1");
  }
  for (double t : {theta1, theta2, theta3, theta4, theta5, kappa, rho}) {
    if (!(t > 0.0)) throw std::invalid_argument("rule thresholds must be positive");
  }
  if (!(temperature > 0.0)) throw std::invalid_argument("rule temperature must be positive");
}

RuleConfig read_rule_config(std::istream& in) {
  auto j = nlohmann::json::parse(in);
  if (!j.is_object()) throw std::invalid_argument("rule config must be a JSON object");
  RuleConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "w1") c.w1 = value.get<int>();
    else if (key == "theta1") c.theta1 = value.get<double>();
    else if (key == "w2") c.w2 = value.get<int>();
    else if (key == "theta2") c.theta2 = value.get<double>();
    else if (key == "w3") c.w3 = value.get<int>();
    else if (key == "theta3") c.theta3 = value.get<double>();
    else if (key == "rho") c.rho = value.get<double>();
    else if (key == "w4") c.w4 = value.get<int>();
    else if (key == "kappa") c.kappa = value.get<double>();
    else if (key == "theta4") c.theta4 = value.get<double>();
    else if (key == "w5") c.w5 = value.get<int>();
    else if (key == "theta5") c.theta5 = value.get<double>();
    else if (key == "temperature") c.temperature = value.get<double>();
    else throw std::invalid_argument("unknown rule config key: " + key);
  }
  c.validate();
  return c;
}

RuleConfig load_rule_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rule config " + path.string());
  return read_rule_config(in);
}

void write_rule_config(std::ostream& out, const RuleConfig& c) {
  nlohmann::ordered_json j;
  j["w1"] = c.w1;
  j["theta1"] = c.theta1;
  j["w2"] = c.w2;
  j["theta2"] = c.theta2;
  j["w3"] = c.w3;
  j["theta3"] = c.theta3;
  j["rho"] = c.rho;
  j["w4"] = c.w4;
  j["kappa"] = c.kappa;
  j["theta4"] = c.theta4;
  j["w5"] = c.w5;
  j["theta5"] = c.theta5;
  j["temperature"] = c.temperature;
  out << j.dump(2) << '\n';
}

namespace {

torch::Tensor as_batch(const torch::Tensor& amounts) {
  if (amounts.dim() == 4) return amounts.unsqueeze(0);
  if (amounts.dim() == 5 && amounts.size(1) == 2) return amounts;
  throw std::invalid_argument("rules: expected (2, M, E, T) or (B, 2, M, E, T) amounts");
}

// Sums over every full span of `w` consecutive windows along the last axis.
torch::Tensor span_sums(const torch::Tensor& v, int w) {
  const auto span = std::min<std::int64_t>(w, v.size(-1));
  return v.unfold(-1, span, 1).sum(-1);
}

// Mean of the `w` windows strictly before each window, zero padded.
torch::Tensor trailing_mean(const torch::Tensor& v, int w) {
  auto sizes = v.sizes().vec();
  sizes.back() = w;
  auto padded = torch::cat({torch::zeros(sizes, v.options()), v}, -1);
  return padded.unfold(-1, w, 1).sum(-1).narrow(-1, 0, v.size(-1)) / static_cast<double>(w);
}

struct Series {
  torch::Tensor inflow;   // (B, M, T)
  torch::Tensor outflow;  // (B, M, T)
  torch::Tensor count;    // (B, M, T)
};

Series series(const torch::Tensor& batch, const torch::Tensor& counts) {
  return {batch.select(1, 0).sum(-2), batch.select(1, 1).sum(-2), counts.sum({1, 3})};
}

}  // namespace

torch::Tensor rules_engine(const torch::Tensor& amounts, const RuleConfig& cfg) {
  cfg.validate();
  const bool single = amounts.dim() == 4;
  auto x = as_batch(amounts).to(torch::kFloat64);
  auto s = series(x, (x > 0).to(torch::kFloat64));
  auto flow = s.inflow + s.outflow;

  auto r1 = (span_sums(s.inflow, cfg.w1) > cfg.theta1).any(-1);
  auto r2 = (span_sums(s.outflow, cfg.w2) > cfg.theta2).any(-1);
  auto in3 = span_sums(s.inflow, cfg.w3);
  auto out3 = span_sums(s.outflow, cfg.w3);
  auto r3 = ((torch::minimum(in3, out3) > cfg.theta3) & (out3 >= cfg.rho * in3)).any(-1);
  auto r4 = ((flow > cfg.kappa * trailing_mean(flow, cfg.w4)) & (flow > cfg.theta4)).any(-1);
  auto r5 = (span_sums(s.count, cfg.w5) > cfg.theta5).any(-1);

  auto alerts = torch::stack({r1, r2, r3, r4, r5}, -1);
  return single ? alerts.squeeze(0) : alerts;
}

torch::Tensor sample_alerted(const torch::Tensor& amounts, const RuleConfig& cfg) {
  auto alerts = rules_engine(as_batch(amounts), cfg);
  return alerts.flatten(1).any(1);
}

torch::Tensor rules_soft_alerts(const torch::Tensor& amounts, const RuleConfig& cfg,
                                const std::optional<torch::Tensor>& counts, std::optional<double> temperature) {
  cfg.validate();
  const double tau = temperature.value_or(cfg.temperature);
  if (!(tau > 0.0)) throw std::invalid_argument("rules proxy: temperature must be positive");
  auto x = as_batch(amounts);
  auto c = counts ? as_batch(*counts) : (x > 0).to(x.scalar_type());
  auto s = series(x, c);
  auto flow = s.inflow + s.outflow;

  auto above = [tau](const torch::Tensor& v, double theta) { return torch::sigmoid(tau * (v - theta) / theta); };
  auto soft_any = [tau](const torch::Tensor& v) { return (torch::softmax(tau * v, -1) * v).sum(-1); };

  auto r1 = soft_any(above(span_sums(s.inflow, cfg.w1), cfg.theta1));
  auto r2 = soft_any(above(span_sums(s.outflow, cfg.w2), cfg.theta2));
  auto in3 = span_sums(s.inflow, cfg.w3);
  auto out3 = span_sums(s.outflow, cfg.w3);
  auto ratio = torch::sigmoid(tau * (out3 - cfg.rho * in3) / cfg.theta3);
  auto r3 = soft_any(above(in3, cfg.theta3) * above(out3, cfg.theta3) * ratio);
  auto jump = torch::sigmoid(tau * (flow - cfg.kappa * trailing_mean(flow, cfg.w4)) / cfg.theta4);
  auto r4 = soft_any(jump * above(flow, cfg.theta4));
  auto r5 = soft_any(above(span_sums(s.count, cfg.w5), cfg.theta5));
  return torch::stack({r1, r2, r3, r4, r5}, -1);
}

torch::Tensor rules_proxy(const torch::Tensor& amounts, const RuleConfig& cfg,
                          const std::optional<torch::Tensor>& counts, std::optional<double> temperature) {
  return rules_soft_alerts(amounts, cfg, counts, temperature).mean();
}

}  // namespace objgan::aml
