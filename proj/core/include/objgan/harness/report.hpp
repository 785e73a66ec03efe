#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "objgan/aml/evaluation.hpp"
#include "objgan/theory_toy.hpp"

namespace objgan::harness {

enum class ReportKind { AmlDetection, RsAttack, TheoryPhase };

/// "aml_detection", "rs_attack" or "theory_phase"; anything else throws.
ReportKind parse_report_kind(const std::string& s);
std::string to_string(ReportKind kind);

/// Affected-user counts for one strategy and one seed.
struct AttackCounts {
  std::string strategy;
  std::vector<std::int64_t> inject_sizes;
  std::vector<double> affected;
};

struct ReportData {
  std::vector<aml::DetectionReport> detection;  // aml_detection, averaged over runs
  std::vector<AttackCounts> attacks;            // rs_attack, averaged per strategy
  std::vector<theory::PhasePortrait> phases;    // theory_phase, concatenated
  // Optional flow tensors (N, 2, M, E, T) for the distribution dumps.
  torch::Tensor real_flows;
  torch::Tensor generated_flows;
};

/// "row,alert_rate,recall,precision" with rows Rules, Model, Rules + Model.
void write_detection_table(std::ostream& out, const std::vector<aml::DetectionReport>& reports);
/// "strategy,<size>,..." with one row per strategy in first-seen order.
void write_attack_table(std::ostream& out, const std::vector<AttackCounts>& counts);
/// "source,quantity,value" rows for per-sample total flow, nonzero amounts and
/// per-sample transaction counts of real and generated flows.
void write_flow_distributions(std::ostream& out, const torch::Tensor& real, const torch::Tensor& generated);

/// Writes the kind's table (and distribution dump when flows are present)
/// under out_dir and returns the written paths. Empty input throws.
std::vector<std::filesystem::path> emit_report(const ReportData& data, ReportKind kind,
                                               const std::filesystem::path& out_dir);
std::vector<std::filesystem::path> emit_report(const ReportData& data, const std::string& kind,
                                               const std::filesystem::path& out_dir);

}  // namespace objgan::harness
