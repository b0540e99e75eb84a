#include <doctest.h>

#include <cmath>
#include <map>

#include "netcomp/kernels.hpp"
#include "netcomp/oracle.hpp"

using namespace netcomp;

namespace {

TinyInstance icmc_instance(std::size_t nodes, std::vector<Edge> links, Hyperparameters hp) {
  return {std::move(links), nodes, hp};
}

}  // namespace

TEST_CASE("one-link log joint in closed form") {
  // Frozen from tests/oracle/derive_values.py (icmc_one_link_logjoint).
  auto inst = icmc_instance(4, {{0, 1}}, Hyperparameters::dirichlet(ModelKind::icmc, 1, 1.0, 0.5));
  const std::vector<ComponentId> z{0};
  CHECK(log_joint(inst, z) == doctest::Approx(-3.1780538303479456).epsilon(1e-13));
  const double direct = 2 * std::lgamma(1.5) + 2 * std::lgamma(0.5) - std::lgamma(4.0) + std::lgamma(2.0) -
                        4 * std::lgamma(0.5);
  CHECK(log_joint(inst, z) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("exact conditionals of small toys") {
  // Frozen from tests/oracle/derive_values.py.
  auto path = icmc_instance(3, {{0, 1}, {1, 2}}, Hyperparameters::dirichlet(ModelKind::icmc, 2, 0.5, 0.3));
  auto p = exact_conditional(path, std::vector<ComponentId>{0, 1}, 0);
  CHECK(p[0] == doctest::Approx(0.33720930232558157).epsilon(1e-13));
  CHECK(p[1] == doctest::Approx(0.66279069767441843).epsilon(1e-13));

  auto dp = icmc_instance(3, {{0, 1}, {1, 2}}, Hyperparameters::dp(ModelKind::icmc, 0.7, 0.3));
  auto q = exact_conditional(dp, std::vector<ComponentId>{0, 0}, 0);
  CHECK(q[0] == doctest::Approx(0.48346055979643747).epsilon(1e-13));
  CHECK(q[1] == doctest::Approx(0.51653944020356253).epsilon(1e-13));

  auto self = icmc_instance(2, {{1, 1}, {0, 1}}, Hyperparameters::dirichlet(ModelKind::icmc, 2, 1.0, 0.5));
  auto s = exact_conditional(self, std::vector<ComponentId>{0, 0}, 0);
  CHECK(s[0] == doctest::Approx(0.625).epsilon(1e-13));

  TinyInstance lda{{{0, 1}, {0, 2}, {2, 1}}, 3, Hyperparameters::dirichlet(ModelKind::ssnlda, 2, 0.4, 0.2)};
  auto r = exact_conditional(lda, std::vector<ComponentId>{0, 1, 0}, 0);
  CHECK(r[0] == doctest::Approx(0.63157894736842108).epsilon(1e-13));
}

TEST_CASE("kernel conditionals agree with the toys") {
  auto path = icmc_instance(3, {{0, 1}, {1, 2}}, Hyperparameters::dirichlet(ModelKind::icmc, 2, 0.5, 0.3));
  const std::vector<ComponentId> z{0, 1};
  CHECK((kernel_conditional(path, z, 0) - exact_conditional(path, z, 0)).cwiseAbs().maxCoeff() < 1e-12);
  auto self = icmc_instance(2, {{1, 1}, {0, 1}}, Hyperparameters::dirichlet(ModelKind::icmc, 2, 1.0, 0.5));
  const std::vector<ComponentId> zs{0, 0};
  CHECK((kernel_conditional(self, zs, 0) - exact_conditional(self, zs, 0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("K = 1 and symmetric states") {
  auto one = icmc_instance(3, {{0, 1}, {1, 2}}, Hyperparameters::dirichlet(ModelKind::icmc, 1, 0.5, 0.3));
  auto p = exact_conditional(one, std::vector<ComponentId>{0, 0}, 1);
  REQUIRE(p.size() == 1);
  CHECK(p[0] == 1.0);
  auto two = icmc_instance(3, {{0, 1}}, Hyperparameters::dirichlet(ModelKind::icmc, 2, 0.5, 0.3));
  auto q = exact_conditional(two, std::vector<ComponentId>{1}, 0);
  CHECK(q[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("enumerated posterior") {
  // Triangle, K=2: frozen from tests/oracle/derive_values.py (triangle_posterior).
  auto tri = icmc_instance(3, {{0, 1}, {1, 2}, {0, 2}}, Hyperparameters::dirichlet(ModelKind::icmc, 2, 0.5, 0.4));
  auto post = enumerate_posterior(tri);
  REQUIRE(post.size() == 8);
  CHECK(post[0].probability == doctest::Approx(0.31286278151845831).epsilon(1e-12));
  CHECK(post[1].probability == doctest::Approx(0.062379072827180562).epsilon(1e-12));
  double total = 0.0;
  for (const auto& e : post) total += e.probability;
  CHECK(std::abs(total - 1.0) < 1e-10);

  // Label permutation symmetry.
  std::map<std::vector<ComponentId>, double> by_state;
  for (const auto& e : post) by_state[e.assignments] = e.probability;
  for (const auto& e : post) {
    auto swapped = e.assignments;
    for (auto& v : swapped) v = 1 - v;
    CHECK(by_state[swapped] == doctest::Approx(e.probability).epsilon(1e-12));
  }
}

TEST_CASE("DP enumeration is over set partitions") {
  auto inst = icmc_instance(4, {{0, 1}, {2, 3}, {1, 2}, {0, 3}}, Hyperparameters::dp(ModelKind::icmc, 0.6, 0.5));
  auto post = enumerate_posterior(inst);
  CHECK(post.size() == 15);  // Bell(4)
  double total = 0.0;
  for (const auto& e : post) {
    CHECK(canonical_labels(e.assignments) == e.assignments);
    total += e.probability;
  }
  CHECK(std::abs(total - 1.0) < 1e-10);
}

TEST_CASE("two-customer CRP law") {
  // Divide out the node part of each partition to isolate the CRP factor.
  const double alpha = 0.8;
  auto hp = Hyperparameters::dp(ModelKind::icmc, alpha, 0.5);
  auto inst = icmc_instance(4, {{0, 1}, {2, 3}}, hp);
  const std::vector<ComponentId> same{0, 0}, split{0, 1};

  const double log_same = log_joint(inst, same), log_split = log_joint(inst, split);
  // m-part of each partition computed by hand: two disjoint links.
  const double mb = 4 * 0.5;
  const double m_one = std::lgamma(mb) - 4 * std::lgamma(0.5) + 2 * std::lgamma(1.5) + 2 * std::lgamma(0.5) -
                       std::lgamma(2 + mb);
  const double m_both = std::lgamma(mb) - 4 * std::lgamma(0.5) + 4 * std::lgamma(1.5) - std::lgamma(4 + mb);
  const double prior_same = std::exp(log_same - m_both);
  const double prior_split = std::exp(log_split - 2 * m_one);
  CHECK(prior_same == doctest::Approx(1.0 / (1.0 + alpha)).epsilon(1e-12));
  CHECK(prior_split == doctest::Approx(alpha / (1.0 + alpha)).epsilon(1e-12));
}

TEST_CASE("enumeration budget") {
  std::vector<Edge> links(13, Edge{0, 1});
  auto inst = icmc_instance(2, links, Hyperparameters::dirichlet(ModelKind::icmc, 3, 0.5, 0.5));
  CHECK_THROWS_AS(enumerate_posterior(inst), EnumerationBudgetExceeded);
  auto dp = icmc_instance(2, links, Hyperparameters::dp(ModelKind::icmc, 0.5, 0.5));
  CHECK_THROWS_AS(enumerate_posterior(dp), EnumerationBudgetExceeded);
  auto small = icmc_instance(2, std::vector<Edge>(5, Edge{0, 1}), Hyperparameters::dp(ModelKind::icmc, 0.5, 0.5));
  CHECK(enumerate_posterior(small).size() == 52);  // Bell(5)
}

TEST_CASE("gamma recurrences over the exercised range") {
  for (double x = 1.05; x < 30.0; x += 0.37) {
    CHECK(std::exp(std::lgamma(x + 1) - std::lgamma(x)) == doctest::Approx(x).epsilon(1e-10));
    CHECK(std::exp(std::lgamma(x + 2) - std::lgamma(x)) == doctest::Approx(x * (x + 1)).epsilon(1e-10));
  }
}

TEST_CASE("oracle suite passes and catches a broken self-link numerator") {
  OracleSuiteOptions opts;
  opts.instances = 150;
  auto ok = run_oracle_suite(opts);
  CHECK(ok.icmc_dirichlet < 1e-12);
  CHECK(ok.icmc_dp < 1e-12);
  CHECK(ok.icmc_dp_routes < 1e-12);
  CHECK(ok.ssnlda_dirichlet < 1e-12);

  opts.icmc_kernel = [](std::uint64_t ki, std::uint64_t kj, std::uint64_t n, bool self, const Hyperparameters& hp,
                        std::size_t m) { return icmc_weight<double>(ki, self ? ki : kj, n, false, hp, m); };
  auto broken = run_oracle_suite(opts);
  CHECK(broken.icmc_dirichlet > 1e-3);
}

TEST_CASE("large-K Dirichlet ratios approach the DP ratios") {
  CHECK(large_k_consistency(1'000'000, 0.3, 0.3, 50) < 1e-4);
  CHECK(large_k_consistency(10, 0.3, 0.3, 50) > 1e-3);
}
