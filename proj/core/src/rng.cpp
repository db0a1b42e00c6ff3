#include "clipfl/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace clipfl {

CounterRng CounterRng::derive(Seed seed, StreamTag tag, std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  key = mix64(key ^ mix64(static_cast<std::uint64_t>(tag) + 0x9e3779b97f4a7c15ULL));
  for (std::uint64_t p : path) {
    key = mix64(key ^ mix64(p + 0xbb67ae8584caa73bULL));
  }
  return CounterRng(key);
}

__extension__ using u128 = unsigned __int128;

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
  if (n <= 1) return 0;
  u128 m = static_cast<u128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double CounterRng::normal() noexcept {
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void shuffle(std::span<std::size_t> items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

std::vector<std::size_t> identity_permutation(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng) {
  auto order = identity_permutation(n);
  shuffle(order, rng);
  return order;
}

bool is_permutation(std::span<const std::size_t> order) {
  std::vector<bool> seen(order.size(), false);
  for (std::size_t v : order) {
    if (v >= order.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

}  // namespace clipfl
