#pragma once

#include <torch/torch.h>

namespace objgan::aml {

/// Per-account throughput sqrt(in * out), shape (B, M). in(m) and out(m) sum the
/// inflow and outflow of account m over all counterparties and windows.
/// Zero where either side is zero, with a finite gradient there.
torch::Tensor account_throughput(const torch::Tensor& amounts);

/// Money-mule loss: minus the mean throughput over batch and accounts.
torch::Tensor mule_objective(const torch::Tensor& amounts);

}  // namespace objgan::aml
