#include <doctest.h>

#include <cmath>
#include <map>

#include "netcomp/partial_sum_tree.hpp"
#include "netcomp/rng.hpp"

using namespace netcomp;

TEST_CASE("update replaces weights and maintains the total") {
  PartialSumTree t;
  t.update(0, 1.0);
  t.update(1, 3.0);
  t.update(0, 2.0);
  CHECK(t.total() == 5.0);
  CHECK(t.size() == 2);
  t.update(0, 0.0);
  CHECK(t.total() == 3.0);
  CHECK(t.size() == 1);
  CHECK_FALSE(t.contains(0));
  CHECK(t.check_invariants());
}

TEST_CASE("sample follows ascending-key cumulative intervals") {
  PartialSumTree t;
  t.update(10, 1.0);
  t.update(20, 3.0);
  CHECK(t.sample(0.5) == 10);
  CHECK(t.sample(0.999) == 10);
  CHECK(t.sample(1.0) == 20);
  CHECK(t.sample(2.0) == 20);
  CHECK(t.sample(4.0) == 20);

  PartialSumTree single;
  single.update(7, 0.25);
  for (double u : {0.0, 0.1, 0.2499}) CHECK(single.sample(u) == 7);
}

TEST_CASE("contract violations") {
  PartialSumTree t;
  CHECK_THROWS_AS(t.sample(0.0), std::logic_error);
  CHECK_THROWS_AS(t.update(1, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(t.update(1, NAN), std::invalid_argument);
  CHECK_THROWS_AS(t.update(1, INFINITY), std::invalid_argument);
}

TEST_CASE("integer weights keep exact sums under churn") {
  BasicPartialSumTree<std::int64_t> t;
  std::map<std::uint32_t, std::int64_t> shadow;
  Rng rng(3);
  for (int step = 0; step < 20000; ++step) {
    auto key = static_cast<std::uint32_t>(rng.below(300));
    auto w = static_cast<std::int64_t>(rng.below(4)) * static_cast<std::int64_t>(rng.below(1000));
    t.update(key, w);
    if (w == 0)
      shadow.erase(key);
    else
      shadow[key] = w;
  }
  std::int64_t sum = 0;
  for (auto& [k, w] : shadow) sum += w;
  CHECK(t.total() == sum);
  CHECK(t.size() == shadow.size());
  CHECK(t.check_invariants());
  std::size_t visited = 0;
  t.for_each([&](std::uint32_t k, std::int64_t w) {
    CHECK(shadow.at(k) == w);
    ++visited;
  });
  CHECK(visited == shadow.size());
}

TEST_CASE("height stays logarithmic") {
  PartialSumTree t;
  for (std::uint32_t k = 0; k < 4096; ++k) t.update(k, 1.0);
  CHECK(t.height() <= 2 * 13);
  for (std::uint32_t k = 0; k < 4096; k += 2) t.erase(k);
  CHECK(t.size() == 2048);
  CHECK(t.height() <= 2 * 12);
  CHECK(t.check_invariants());
}

TEST_CASE("erased slots are reused") {
  PartialSumTree t;
  for (std::uint32_t k = 0; k < 100; ++k) t.update(k, 1.0);
  std::size_t bytes = 0;
  for (std::uint32_t round = 1; round <= 10; ++round) {
    if (round == 2) bytes = t.memory_bytes();
    for (std::uint32_t k = 0; k < 100; ++k) t.erase(k + 1000 * (round - 1));
    CHECK(t.empty());
    for (std::uint32_t k = 0; k < 100; ++k) t.update(k + 1000 * round, 1.0);
  }
  CHECK(t.memory_bytes() == bytes);
}
