#include "objgan/aml/objective.hpp"

#include <stdexcept>

namespace objgan::aml {

torch::Tensor account_throughput(const torch::Tensor& amounts) {
  auto x = amounts.dim() == 4 ? amounts.unsqueeze(0) : amounts;
  if (x.dim() != 5 || x.size(1) != 2) throw std::invalid_argument("mule objective: expected (B, 2, M, E, T)");
  auto in = x.select(1, 0).sum({-1, -2});
  auto out = x.select(1, 1).sum({-1, -2});
  auto product = in * out;
  auto positive = product > 0;
  // sqrt has an infinite slope at zero; route those entries through a dummy value.
  auto safe = torch::where(positive, product, torch::ones_like(product));
  return torch::where(positive, torch::sqrt(safe), torch::zeros_like(product));
}

torch::Tensor mule_objective(const torch::Tensor& amounts) { return -account_throughput(amounts).mean(); }

}  // namespace objgan::aml
