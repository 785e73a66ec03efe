#include "objgan/recsys/ratings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>

namespace objgan::recsys {

void RatingsMatrix::validate() const {
  if (!values.defined() || values.dim() != 2) throw std::invalid_argument("ratings must be a 2-D matrix");
  auto v = values;
  if (!((v == v.round()) & (v >= 0) & (v <= 5)).all().item<bool>()) {
    throw std::invalid_argument("ratings must be integers in 0..5");
  }
  if (!(v > 0).any(1).all().item<bool>()) throw std::invalid_argument("every user must have at least one rating");
}

namespace {

std::int64_t parse_int(std::string_view s, std::size_t line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("movielens line " + std::to_string(line_no) + ": bad integer '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

RatingsMatrix read_movielens(std::istream& in) {
  std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t>> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view rest(line);
    std::int64_t fields[4];
    for (int f = 0; f < 4; ++f) {
      const auto sep = f < 3 ? rest.find("::") : std::string_view::npos;
      if (f < 3 && sep == std::string_view::npos) {
        throw std::runtime_error("movielens line " + std::to_string(line_no) + ": expected 4 '::'-separated fields");
      }
      fields[f] = parse_int(rest.substr(0, sep), line_no);
      if (f < 3) rest.remove_prefix(sep + 2);
    }
    if (fields[2] < 1 || fields[2] > 5) {
      throw std::runtime_error("movielens line " + std::to_string(line_no) + ": rating out of range");
    }
    triples.emplace_back(fields[0], fields[1], fields[2]);
  }
  if (triples.empty()) throw std::runtime_error("movielens: no ratings");

  std::map<std::int64_t, std::int64_t> users, items;
  for (const auto& [u, i, r] : triples) {
    users.emplace(u, 0);
    items.emplace(i, 0);
  }
  RatingsMatrix out;
  for (auto& [id, idx] : users) {
    idx = static_cast<std::int64_t>(out.user_ids.size());
    out.user_ids.push_back(id);
  }
  for (auto& [id, idx] : items) {
    idx = static_cast<std::int64_t>(out.item_ids.size());
    out.item_ids.push_back(id);
  }
  out.values = torch::zeros({static_cast<std::int64_t>(users.size()), static_cast<std::int64_t>(items.size())},
                            torch::kFloat32);
  auto acc = out.values.accessor<float, 2>();
  for (const auto& [u, i, r] : triples) {
    float& cell = acc[users[u]][items[i]];
    if (cell != 0.0f) throw std::runtime_error("movielens: duplicate rating for user " + std::to_string(u));
    cell = static_cast<float>(r);
  }
  return out;
}

RatingsMatrix load_movielens(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ratings file " + path.string());
  return read_movielens(in);
}

void write_movielens(std::ostream& out, const torch::Tensor& ratings, const std::vector<std::int64_t>& item_ids,
                     const std::vector<std::int64_t>& user_ids, std::int64_t timestamp) {
  auto r = ratings.to(torch::kFloat32).contiguous();
  if (r.size(1) != static_cast<std::int64_t>(item_ids.size())) {
    throw std::invalid_argument("write_movielens: item mapping does not match column count");
  }
  if (r.size(0) != static_cast<std::int64_t>(user_ids.size())) {
    throw std::invalid_argument("write_movielens: user id list does not match row count");
  }
  auto acc = r.accessor<float, 2>();
  for (std::int64_t u = 0; u < r.size(0); ++u) {
    for (std::int64_t j = 0; j < r.size(1); ++j) {
      const float v = acc[u][j];
      if (v == 0.0f) continue;
      out << user_ids[static_cast<std::size_t>(u)] << "::" << item_ids[static_cast<std::size_t>(j)]
          << "::" << static_cast<int>(std::lround(v)) << "::" << timestamp << '\n';
    }
  }
}

void write_item_mapping(std::ostream& out, const RatingsMatrix& r) {
  out << "column,movie_id\n";
  for (std::size_t j = 0; j < r.item_ids.size(); ++j) out << j << ',' << r.item_ids[j] << '\n';
}

std::vector<std::int64_t> read_item_mapping(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "column,movie_id") throw std::runtime_error("item mapping: bad header");
  std::vector<std::int64_t> ids;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("item mapping: malformed line");
    const auto column = std::stoll(line.substr(0, comma));
    if (column != static_cast<std::int64_t>(ids.size())) throw std::runtime_error("item mapping: columns out of order");
    ids.push_back(std::stoll(line.substr(comma + 1)));
  }
  return ids;
}

RatingsMatrix synth_ratings(const SyntheticRatingsConfig& c, std::uint64_t seed) {
  if (c.users < 1 || c.items < 1) throw std::invalid_argument("synthetic ratings: empty shape");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::lognormal_distribution<double> extra(std::log(c.extra_ratings_median), c.extra_ratings_sigma);

  // Popularity rank is a random permutation so column order carries no signal.
  std::vector<std::int64_t> rank(static_cast<std::size_t>(c.items));
  std::iota(rank.begin(), rank.end(), 0);
  std::shuffle(rank.begin(), rank.end(), rng);
  std::vector<double> log_pop(static_cast<std::size_t>(c.items)), quality(log_pop.size());
  std::vector<std::vector<double>> item_f(log_pop.size(), std::vector<double>(static_cast<std::size_t>(c.factors)));
  const double scale = 1.0 / std::sqrt(static_cast<double>(c.factors));
  for (std::size_t j = 0; j < log_pop.size(); ++j) {
    log_pop[j] = -c.zipf_exponent * std::log(static_cast<double>(rank[j]) + c.zipf_offset);
    quality[j] = c.quality_mean + c.quality_sd * normal(rng);
    for (auto& f : item_f[j]) f = normal(rng) * scale;
  }

  RatingsMatrix out;
  out.values = torch::zeros({c.users, c.items}, torch::kFloat32);
  auto acc = out.values.accessor<float, 2>();
  std::vector<double> user_f(static_cast<std::size_t>(c.factors));
  std::vector<std::pair<double, std::int64_t>> keys(static_cast<std::size_t>(c.items));
  for (std::int64_t u = 0; u < c.users; ++u) {
    for (auto& f : user_f) f = normal(rng);
    const double bias = c.user_bias_sd * normal(rng);
    const auto n = std::min<std::int64_t>({c.max_ratings, c.items,
                                           c.min_ratings + static_cast<std::int64_t>(std::floor(extra(rng)))});
    // Gumbel top-n draws n distinct items with probability ~ exp(score).
    std::vector<double> taste(static_cast<std::size_t>(c.items));
    for (std::int64_t j = 0; j < c.items; ++j) {
      double dot = 0.0;
      for (std::size_t f = 0; f < user_f.size(); ++f) dot += user_f[f] * item_f[static_cast<std::size_t>(j)][f];
      taste[static_cast<std::size_t>(j)] = dot;
      const double g = -std::log(-std::log(std::max(unit(rng), 1e-300)));
      keys[static_cast<std::size_t>(j)] = {log_pop[static_cast<std::size_t>(j)] + c.taste_weight * dot + g, j};
    }
    std::partial_sort(keys.begin(), keys.begin() + n, keys.end(), std::greater<>());
    for (std::int64_t k = 0; k < n; ++k) {
      const auto j = keys[static_cast<std::size_t>(k)].second;
      const double value = quality[static_cast<std::size_t>(j)] + bias +
                           c.taste_rating_weight * taste[static_cast<std::size_t>(j)] +
                           c.noise_sd * normal(rng);
      acc[u][j] = static_cast<float>(std::clamp(std::round(value), 1.0, 5.0));
    }
  }
  // Give every unrated item one rating from a random user.
  std::uniform_int_distribution<std::int64_t> pick_user(0, c.users - 1);
  for (std::int64_t j = 0; j < c.items; ++j) {
    bool any = false;
    for (std::int64_t u = 0; u < c.users && !any; ++u) any = acc[u][j] != 0.0f;
    if (!any) {
      const double value = quality[static_cast<std::size_t>(j)] + c.noise_sd * normal(rng);
      acc[pick_user(rng)][j] = static_cast<float>(std::clamp(std::round(value), 1.0, 5.0));
    }
  }
  for (std::int64_t u = 0; u < c.users; ++u) out.user_ids.push_back(u + 1);
  for (std::int64_t j = 0; j < c.items; ++j) out.item_ids.push_back(j + 1);
  return out;
}

ItemStats item_stats(const RatingsMatrix& r) {
  auto rated = r.rated();
  auto counts = rated.sum(0).to(torch::kInt64).contiguous();
  auto sums = r.values.sum(0).to(torch::kFloat64).contiguous();
  ItemStats s;
  s.counts.assign(counts.data_ptr<std::int64_t>(), counts.data_ptr<std::int64_t>() + counts.numel());
  s.means.resize(s.counts.size());
  const double* sp = sums.data_ptr<double>();
  for (std::size_t j = 0; j < s.counts.size(); ++j) s.means[j] = s.counts[j] > 0 ? sp[j] / s.counts[j] : 0.0;
  return s;
}

std::int64_t choose_target_item(const RatingsMatrix& r, std::uint64_t seed) {
  auto stats = item_stats(r);
  std::vector<std::int64_t> order(stats.counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return stats.counts[static_cast<std::size_t>(a)] < stats.counts[static_cast<std::size_t>(b)];
  });
  const auto n = static_cast<std::int64_t>(order.size());
  const auto half_band = std::max<std::int64_t>(1, n / 20);
  const auto lo = std::max<std::int64_t>(0, n / 2 - half_band);
  const auto hi = std::min<std::int64_t>(n - 1, n / 2 + half_band);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> pick(lo, hi);
  return order[static_cast<std::size_t>(pick(rng))];
}

}  // namespace objgan::recsys
