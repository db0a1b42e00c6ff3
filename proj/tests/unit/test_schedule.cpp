#include "clipfl/errors.hpp"
#include "clipfl/rng.hpp"
#include "clipfl/schedule.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <set>

using namespace clipfl;
using namespace clipfl::testing;

TEST_CASE("rng streams are pure functions of their path") {
  auto a = CounterRng::derive(7, StreamTag::kDataPermutation, {3, 1});
  auto b = CounterRng::derive(7, StreamTag::kDataPermutation, {3, 1});
  auto c = CounterRng::derive(7, StreamTag::kDataPermutation, {3, 2});
  bool same = true, differ = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a(), vb = b(), vc = c();
    same = same && va == vb;
    differ = differ || va != vc;
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("rng uniform and bounded draws stay in range") {
  auto r = CounterRng::derive(1, StreamTag::kProbes);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(r.below(7) < 7);
  }
}

TEST_CASE("bounded draws are roughly uniform") {
  auto r = CounterRng::derive(2, StreamTag::kProbes);
  std::vector<int> hist(5, 0);
  for (int i = 0; i < 50000; ++i) ++hist[r.below(5)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
}

TEST_CASE("normal draws have unit variance") {
  auto r = CounterRng::derive(3, StreamTag::kProbes);
  double s = 0.0, s2 = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.03);
  CHECK(std::abs(s2 / n - 1.0) < 0.03);
}

TEST_CASE("random permutations are bijections") {
  for_all(100, 7, [](Gen& gen, std::size_t) {
    const std::size_t n = gen.size(1, 50);
    auto r = CounterRng::derive(gen.seed(), StreamTag::kDataPermutation);
    const auto p = random_permutation(n, r);
    const bool ok = p.size() == n && is_permutation(p);
    CHECK(ok);
    return ok;
  });
  const std::vector<std::size_t> bad{0, 2, 2};
  CHECK_FALSE(is_permutation(bad));
  CHECK(identity_permutation(3) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("every permutation of three items appears") {
  std::set<std::vector<std::size_t>> seen;
  for (std::uint64_t k = 0; k < 200; ++k) {
    auto r = CounterRng::derive(k, StreamTag::kDataPermutation);
    seen.insert(random_permutation(3, r));
  }
  CHECK(seen.size() == 6);
}

TEST_CASE("local schedules") {
  const auto u = LocalSchedule::uniform(3);
  CHECK(u.steps(0) == 3);
  CHECK(u.steps(100) == 3);
  CHECK(u.max_gap() == 3);
  const auto t = LocalSchedule::from_sync_times({0, 2, 3, 7});
  CHECK(t.gaps() == std::vector<std::size_t>{2, 1, 4});
  CHECK(t.steps(5) == 4);
  CHECK(t.max_gap() == 4);
  CHECK_THROWS_AS(LocalSchedule::uniform(0), UsageError);
  CHECK_THROWS_AS(LocalSchedule::from_sync_times({1, 2}), UsageError);
  CHECK_THROWS_AS(LocalSchedule::from_sync_times({0, 2, 2}), UsageError);
  CHECK_THROWS_AS(LocalSchedule::from_sync_times({0}), UsageError);
}

TEST_CASE("step schedules") {
  const StepSchedule s({0.5, 0.25});
  CHECK(s.at(0) == 0.5);
  CHECK(s.at(1) == 0.25);
  CHECK(s.at(9) == 0.25);
  CHECK_THROWS_AS(StepSchedule(std::vector<double>{}), UsageError);
  CHECK_THROWS_AS(StepSchedule({0.0}), UsageError);
  CHECK_THROWS_AS(StepSchedule({NAN}), UsageError);
}

TEST_CASE("cohorts partition the clients") {
  for_all(100, 8, [](Gen& gen, std::size_t) {
    const std::size_t C = gen.size(1, 5);
    const std::size_t M = C * gen.size(1, 6);
    auto r = CounterRng::derive(gen.seed(), StreamTag::kClientPermutation);
    const auto s = CohortSchedule::make(M, C, r);
    std::vector<int> hits(M, 0);
    std::size_t total = 0;
    for (const auto& c : s.cohorts) {
      CHECK(c.size() == C);
      total += c.size();
      for (auto m : c) ++hits[m];
    }
    bool ok = s.rounds == M / C && total == M;
    for (int h : hits) ok = ok && h == 1;
    CHECK(ok);
    return ok;
  });
  auto r = CounterRng::derive(0, StreamTag::kClientPermutation);
  CHECK_THROWS_AS(CohortSchedule::make(5, 2, r), ConfigError);
  CHECK_THROWS_AS(CohortSchedule::make(4, 0, r), ConfigError);
}

TEST_CASE("full participation gives one round") {
  auto r = CounterRng::derive(0, StreamTag::kClientPermutation);
  const auto s = CohortSchedule::make(6, 6, r);
  CHECK(s.rounds == 1);
  CHECK(is_permutation(s.cohorts[0]));
}

TEST_CASE("shuffle mode names round-trip") {
  for (auto m : {ShuffleMode::kReshuffle, ShuffleMode::kShuffleOnce, ShuffleMode::kIncremental}) {
    CHECK(shuffle_mode_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(shuffle_mode_from_string("sometimes"), UsageError);
}
