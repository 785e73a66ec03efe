#include "objgan/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace objgan::harness {

ReportKind parse_report_kind(const std::string& s) {
  if (s == "aml_detection") return ReportKind::AmlDetection;
  if (s == "rs_attack") return ReportKind::RsAttack;
  if (s == "theory_phase") return ReportKind::TheoryPhase;
  throw std::invalid_argument("unknown report kind '" + s + "' (expected aml_detection, rs_attack or theory_phase)");
}

std::string to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::AmlDetection:
      return "aml_detection";
    case ReportKind::RsAttack:
      return "rs_attack";
    case ReportKind::TheoryPhase:
      return "theory_phase";
  }
  return "aml_detection";
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_detection_table(std::ostream& out, const std::vector<aml::DetectionReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("detection table: no reports");
  out << "row,alert_rate,recall,precision\n";
  auto emit = [&](const std::string& name, auto pick) {
    double a = 0, r = 0, p = 0;
    for (const auto& rep : reports) {
      const aml::DetectionRow& row = pick(rep);
      a += row.alert_rate;
      r += row.recall;
      p += row.precision;
    }
    const double n = static_cast<double>(reports.size());
    out << name << ',' << num(a / n) << ',' << num(r / n) << ',' << num(p / n) << '\n';
  };
  emit("Rules", [](const aml::DetectionReport& d) -> const aml::DetectionRow& { return d.rules; });
  emit("Model", [](const aml::DetectionReport& d) -> const aml::DetectionRow& { return d.model; });
  emit("Rules + Model", [](const aml::DetectionReport& d) -> const aml::DetectionRow& { return d.combined; });
}

void write_attack_table(std::ostream& out, const std::vector<AttackCounts>& counts) {
  if (counts.empty()) throw std::invalid_argument("attack table: no counts");
  const auto& sizes = counts.front().inject_sizes;
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<double>, int>> sums;
  for (const auto& c : counts) {
    if (c.inject_sizes != sizes || c.affected.size() != sizes.size()) {
      throw std::invalid_argument("attack table: inconsistent injection sizes");
    }
    auto [it, inserted] = sums.try_emplace(c.strategy, std::vector<double>(sizes.size(), 0.0), 0);
    if (inserted) order.push_back(c.strategy);
    for (std::size_t i = 0; i < sizes.size(); ++i) it->second.first[i] += c.affected[i];
    ++it->second.second;
  }
  out << "strategy";
  for (auto s : sizes) out << ',' << s;
  out << '\n';
  for (const auto& name : order) {
    const auto& [total, n] = sums.at(name);
    out << name;
    for (double v : total) out << ',' << num(v / n);
    out << '\n';
  }
}

void write_flow_distributions(std::ostream& out, const torch::Tensor& real, const torch::Tensor& generated) {
  out << "source,quantity,value\n";
  auto dump = [&](const char* source, const torch::Tensor& flows) {
    if (!flows.defined() || flows.numel() == 0) return;
    auto f = flows.to(torch::kFloat64).flatten(1);
    auto totals = f.sum(1).contiguous();
    auto counts = (f > 0).sum(1).to(torch::kFloat64).contiguous();
    auto nonzero = f.masked_select(f > 0).contiguous();
    for (std::int64_t i = 0; i < totals.size(0); ++i) out << source << ",total_flow," << num(totals[i].item<double>()) << '\n';
    for (std::int64_t i = 0; i < counts.size(0); ++i) out << source << ",count," << num(counts[i].item<double>()) << '\n';
    const double* p = nonzero.data_ptr<double>();
    for (std::int64_t i = 0; i < nonzero.numel(); ++i) out << source << ",amount," << num(p[i]) << '\n';
  };
  dump("real", real);
  dump("generated", generated);
}

std::vector<std::filesystem::path> emit_report(const ReportData& data, ReportKind kind,
                                               const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::string& name) {
    written.push_back(out_dir / name);
    std::ofstream f(written.back());
    if (!f) throw std::runtime_error("cannot write " + written.back().string());
    return f;
  };
  switch (kind) {
    case ReportKind::AmlDetection: {
      if (data.detection.empty()) throw std::invalid_argument("aml_detection report: no records");
      auto f = open("aml_detection.csv");
      write_detection_table(f, data.detection);
      break;
    }
    case ReportKind::RsAttack: {
      if (data.attacks.empty()) throw std::invalid_argument("rs_attack report: no records");
      auto f = open("rs_attack.csv");
      write_attack_table(f, data.attacks);
      break;
    }
    case ReportKind::TheoryPhase: {
      if (data.phases.empty()) throw std::invalid_argument("theory_phase report: no records");
      theory::PhasePortrait all;
      for (const auto& p : data.phases) {
        all.field.insert(all.field.end(), p.field.begin(), p.field.end());
        all.fixed_point_curve.insert(all.fixed_point_curve.end(), p.fixed_point_curve.begin(),
                                     p.fixed_point_curve.end());
      }
      auto f = open("theory_phase.csv");
      theory::write_phase_csv(f, all);
      break;
    }
  }
  if (data.real_flows.defined() || data.generated_flows.defined()) {
    auto f = open("flow_distributions.csv");
    write_flow_distributions(f, data.real_flows, data.generated_flows);
  }
  return written;
}

std::vector<std::filesystem::path> emit_report(const ReportData& data, const std::string& kind,
                                               const std::filesystem::path& out_dir) {
  return emit_report(data, parse_report_kind(kind), out_dir);
}

}  // namespace objgan::harness
