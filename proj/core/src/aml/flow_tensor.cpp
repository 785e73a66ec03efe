#include "objgan/aml/flow_tensor.hpp"

#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace objgan::aml {

FlowShape FlowTensor::shape() const {
  return {amounts.size(1), amounts.size(2), amounts.size(3)};
}

torch::Tensor FlowTensor::counts() const { return (amounts > 0).to(torch::kFloat64); }

std::int64_t FlowTensor::total_cents() const {
  auto c = amounts.contiguous();
  const double* p = c.data_ptr<double>();
  std::int64_t total = 0;
  for (std::int64_t i = 0; i < c.numel(); ++i) total += std::llround(p[i] * 100.0);
  return total;
}

std::int64_t to_cents(double amount) { return std::llround(amount * 100.0); }

FlowTensor tensorize(const std::vector<TransactionRecord>& records, const std::vector<std::string>& internal_ids,
                     double window_seconds, std::int64_t origin, const FlowShape& shape) {
  if (!(window_seconds > 0.0)) throw std::invalid_argument("tensorize: window length must be positive");
  if (static_cast<std::int64_t>(internal_ids.size()) > shape.internal_accounts) {
    throw std::invalid_argument("tensorize: more internal accounts than M");
  }
  std::unordered_map<std::string, std::int64_t> internal;
  for (std::size_t i = 0; i < internal_ids.size(); ++i) internal.emplace(internal_ids[i], static_cast<std::int64_t>(i));

  FlowTensor out;
  out.window_seconds = window_seconds;
  out.internal_ids = internal_ids;
  std::unordered_map<std::string, std::int64_t> external;
  std::vector<std::int64_t> cents(static_cast<std::size_t>(shape.numel()), 0);
  std::int64_t overflow = 0;

  for (const auto& r : records) {
    if (!(r.amount > 0.0)) throw std::invalid_argument("tensorize: amount must be positive");
    if (r.source_id == r.dest_id) throw std::invalid_argument("tensorize: source equals destination");
    const auto src = internal.find(r.source_id);
    const auto dst = internal.find(r.dest_id);
    const bool src_internal = src != internal.end();
    const bool dst_internal = dst != internal.end();
    if (src_internal == dst_internal) {
      throw std::invalid_argument("tensorize: record " + r.source_id + "->" + r.dest_id + " touches " +
                                  (src_internal ? "two" : "zero") + " internal accounts");
    }
    const int direction = dst_internal ? kInflow : kOutflow;
    const std::int64_t m = dst_internal ? dst->second : src->second;
    const std::string& counterparty = dst_internal ? r.source_id : r.dest_id;

    const double offset = static_cast<double>(r.timestamp - origin);
    const auto t = static_cast<std::int64_t>(std::floor(offset / window_seconds));
    if (offset < 0 || t >= shape.windows) {
      throw std::invalid_argument("tensorize: timestamp outside the horizon");
    }

    auto [it, inserted] = external.emplace(counterparty, static_cast<std::int64_t>(external.size()));
    if (inserted) out.external_ids.push_back(counterparty);
    const std::int64_t e = it->second;
    if (e >= shape.external_accounts) {
      ++overflow;
      continue;
    }
    const auto idx = ((direction * shape.internal_accounts + m) * shape.external_accounts + e) * shape.windows + t;
    cents[static_cast<std::size_t>(idx)] += to_cents(r.amount);
  }
  if (overflow > 0) {
    throw std::invalid_argument("tensorize: " + std::to_string(external.size()) +
                                " external counterparties exceed E=" + std::to_string(shape.external_accounts));
  }

  out.amounts = torch::empty(shape.sample_sizes(), torch::kFloat64);
  double* p = out.amounts.data_ptr<double>();
  for (std::size_t i = 0; i < cents.size(); ++i) p[i] = static_cast<double>(cents[i]) / 100.0;
  return out;
}

std::int64_t parse_iso8601(const std::string& text) {
  std::tm tm{};
  std::istringstream ss(text);
  ss >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
  if (ss.fail()) throw std::invalid_argument("bad ISO-8601 timestamp: " + text);
  std::string rest;
  ss >> rest;
  if (!rest.empty() && rest != "Z") throw std::invalid_argument("unsupported timestamp suffix: " + text);
  return static_cast<std::int64_t>(timegm(&tm));
}

std::string format_iso8601(std::int64_t seconds) {
  const std::time_t t = static_cast<std::time_t>(seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<TransactionRecord> read_transactions_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("transactions csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "source_id,dest_id,amount,timestamp") {
    throw std::runtime_error("transactions csv: unexpected header: " + line);
  }
  std::vector<TransactionRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    TransactionRecord r;
    std::string amount, ts;
    if (!std::getline(ss, r.source_id, ',') || !std::getline(ss, r.dest_id, ',') || !std::getline(ss, amount, ',') ||
        !std::getline(ss, ts)) {
      throw std::runtime_error("transactions csv: malformed line " + std::to_string(line_no));
    }
    try {
      r.amount = std::stod(amount);
      r.timestamp = parse_iso8601(ts);
    } catch (const std::exception& e) {
      throw std::runtime_error("transactions csv line " + std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_transactions_csv(std::ostream& out, const std::vector<TransactionRecord>& records) {
  out << "source_id,dest_id,amount,timestamp\n";
  for (const auto& r : records) {
    out << r.source_id << ',' << r.dest_id << ',' << std::fixed << std::setprecision(2) << r.amount << ','
        << format_iso8601(r.timestamp) << '\n';
  }
  out << std::defaultfloat;
}

namespace {

constexpr char kFlowMagic[8] = {'F', 'L', 'O', 'W', 'T', 'N', 'S', 'R'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("flow dataset truncated");
  return v;
}

}  // namespace

void write_flow_dataset(const std::filesystem::path& path, const FlowDataset& dataset) {
  auto a = dataset.amounts.to(torch::kFloat32).contiguous();
  const auto& s = dataset.shape;
  if (a.dim() != 5 || a.size(1) != 2 || a.size(2) != s.internal_accounts || a.size(3) != s.external_accounts ||
      a.size(4) != s.windows) {
    throw std::invalid_argument("flow dataset: tensor shape does not match header shape");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(kFlowMagic, sizeof(kFlowMagic));
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, 2);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.internal_accounts));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.external_accounts));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.windows));
  put<double>(out, dataset.window_seconds);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(a.size(0)));
  out.write(static_cast<const char*>(a.data_ptr()), static_cast<std::streamsize>(a.nbytes()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

FlowDataset read_flow_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kFlowMagic, sizeof(kFlowMagic)) != 0) {
    throw std::runtime_error("not a flow dataset: " + path.string());
  }
  if (get<std::uint32_t>(in) != 1) throw std::runtime_error("unsupported flow dataset version");
  if (get<std::uint32_t>(in) != 2) throw std::runtime_error("flow dataset must have two directions");
  FlowDataset ds;
  ds.shape.internal_accounts = get<std::uint32_t>(in);
  ds.shape.external_accounts = get<std::uint32_t>(in);
  ds.shape.windows = get<std::uint32_t>(in);
  ds.window_seconds = get<double>(in);
  const auto count = static_cast<std::int64_t>(get<std::uint64_t>(in));
  ds.amounts = torch::empty(ds.shape.batch_sizes(count), torch::kFloat32);
  in.read(static_cast<char*>(ds.amounts.data_ptr()), static_cast<std::streamsize>(ds.amounts.nbytes()));
  if (!in) throw std::runtime_error("flow dataset truncated");
  return ds;
}

}  // namespace objgan::aml
