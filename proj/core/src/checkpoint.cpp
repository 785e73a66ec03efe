#include "objgan/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

namespace objgan {

namespace {

constexpr char kMagic[8] = {'O', 'B', 'J', 'G', 'A', 'N', 'C', 'K'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint truncated");
  return value;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw std::runtime_error("checkpoint truncated");
  return s;
}

std::map<std::string, torch::Tensor> named_state(const torch::nn::Module& module) {
  std::map<std::string, torch::Tensor> state;
  for (const auto& p : module.named_parameters()) state.emplace(p.key(), p.value());
  for (const auto& b : module.named_buffers()) state.emplace(b.key(), b.value());
  return state;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const torch::nn::Module& module,
                     const std::string& config_digest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put_string(out, config_digest);
  const auto state = named_state(module);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(state.size()));
  for (const auto& [name, tensor] : state) {
    auto t = tensor.detach().contiguous();
    const bool f64 = t.scalar_type() == torch::kFloat64;
    if (!f64) t = t.to(torch::kFloat32);
    put_string(out, name);
    put<std::uint8_t>(out, f64 ? 1 : 0);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dim()));
    for (auto d : t.sizes()) put<std::int64_t>(out, d);
    out.write(static_cast<const char*>(t.data_ptr()), static_cast<std::streamsize>(t.nbytes()));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

std::string load_checkpoint(const std::filesystem::path& path, torch::nn::Module& module,
                            const std::string& expected_digest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path.string());
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  auto digest = get_string(in);
  if (!expected_digest.empty() && digest != expected_digest) {
    throw std::runtime_error("checkpoint config digest mismatch: " + digest + " != " + expected_digest);
  }
  auto state = named_state(module);
  const auto count = get<std::uint32_t>(in);
  torch::NoGradGuard no_grad;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = get_string(in);
    const bool f64 = get<std::uint8_t>(in) == 1;
    const auto ndim = get<std::uint32_t>(in);
    std::vector<std::int64_t> dims(ndim);
    for (auto& d : dims) d = get<std::int64_t>(in);
    auto loaded = torch::empty(dims, f64 ? torch::kFloat64 : torch::kFloat32);
    in.read(static_cast<char*>(loaded.data_ptr()), static_cast<std::streamsize>(loaded.nbytes()));
    if (!in) throw std::runtime_error("checkpoint truncated in tensor " + name);
    auto it = state.find(name);
    if (it == state.end()) throw std::runtime_error("checkpoint tensor not in module: " + name);
    if (it->second.sizes() != loaded.sizes()) throw std::runtime_error("shape mismatch for " + name);
    it->second.copy_(loaded);
  }
  return digest;
}

}  // namespace objgan
