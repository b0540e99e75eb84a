#include <doctest.h>

#include <cmath>
#include <set>

#include "netcomp/network.hpp"
#include "netcomp/sampler.hpp"

using namespace netcomp;

namespace {

Network two_triangles() { return Network::undirected(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}}); }

Network random_network(std::size_t nodes, std::size_t links, std::uint64_t seed, bool directed = false,
                       bool self_loops = true) {
  Rng rng(seed);
  std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
  while (pairs.size() < links) {
    auto a = static_cast<NodeIndex>(rng.below(nodes)), b = static_cast<NodeIndex>(rng.below(nodes));
    if (a == b && !self_loops) continue;
    pairs.emplace_back(a, b);
  }
  return directed ? Network::directed_from(nodes, pairs) : Network::undirected(nodes, pairs);
}

std::vector<Hyperparameters> all_settings(std::size_t k) {
  return {Hyperparameters::dirichlet(ModelKind::icmc, k, 0.4, 0.1), Hyperparameters::dp(ModelKind::icmc, 0.8, 0.2),
          Hyperparameters::dirichlet(ModelKind::ssnlda, k, 0.4, 0.1), Hyperparameters::dp(ModelKind::ssnlda, 0.8, 0.2)};
}

}  // namespace

TEST_CASE("SSN-LDA expands undirected edges into both directions") {
  auto net = Network::undirected(3, {{0, 1}, {2, 2}});
  auto links = model_links(net, ModelKind::ssnlda);
  CHECK(links == std::vector<Edge>{{0, 1}, {1, 0}, {2, 2}});
  CHECK(model_links(net, ModelKind::icmc) == net.edges);
  auto dir = Network::directed_from(3, {{0, 1}, {2, 1}});
  CHECK(model_links(dir, ModelKind::ssnlda) == dir.edges);
}

TEST_CASE("ICMc rejects directed networks") {
  auto dir = Network::directed_from(2, {{0, 1}});
  CHECK_THROWS_AS(SamplerState(dir, Hyperparameters::dirichlet(ModelKind::icmc, 2, 1, 1), 1), std::invalid_argument);
}

TEST_CASE("chain configuration") {
  CHECK((ChainConfig{10, 5, 1, 0}.snapshot_count()) == 5);
  CHECK((ChainConfig{10, 0, 3, 0}.snapshot_count()) == 3);
  CHECK_THROWS((ChainConfig{0, 0, 1, 0}.validate()));
  CHECK_THROWS((ChainConfig{5, 5, 1, 0}.validate()));
  CHECK_THROWS((ChainConfig{5, 2, 4, 0}.validate()));
  CHECK_THROWS((ChainConfig{5, 2, 0, 0}.validate()));
  CHECK_NOTHROW((ChainConfig{5, 2, 3, 0}.validate()));

  auto net = two_triangles();
  auto r = run_chain(net, Hyperparameters::dirichlet(ModelKind::icmc, 2, 0.5, 0.1), {10, 5, 1, 7});
  CHECK(r.trace.size() == 10);
  REQUIRE(r.snapshots.size() == 5);
  CHECK(r.snapshots.front().sweep == 6);
  CHECK(r.snapshots.back().sweep == 10);
}

TEST_CASE("chains are deterministic given the seed") {
  auto net = random_network(30, 120, 2);
  for (const auto& hp : all_settings(4))
    for (auto path : {SamplingPath::automatic, SamplingPath::tree}) {
      auto a = run_chain(net, hp, {20, 10, 2, 99}, path);
      auto b = run_chain(net, hp, {20, 10, 2, 99}, path);
      CHECK(a.trace == b.trace);
      CHECK(a.initialization_score == b.initialization_score);
      REQUIRE(a.snapshots.size() == b.snapshots.size());
      for (std::size_t s = 0; s < a.snapshots.size(); ++s)
        CHECK(a.snapshots[s].assignments == b.snapshots[s].assignments);
      auto c = run_chain(net, hp, {20, 10, 2, 100}, path);
      CHECK(c.trace != a.trace);
    }
}

TEST_CASE("single component: sweeps are no-ops with zero log-score") {
  auto net = two_triangles();
  auto state = init_sequential(net, Hyperparameters::dirichlet(ModelKind::icmc, 1, 1.0, 0.1), 3);
  for (int s = 0; s < 5; ++s) CHECK(gibbs_sweep(state) == 0.0);
  for (auto z : state.assignments()) CHECK(z == 0);
}

TEST_CASE("first link under DP opens exactly one component") {
  auto net = Network::undirected(2, {{0, 1}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto state = init_sequential(net, Hyperparameters::dp(ModelKind::icmc, 0.3, 0.3), seed);
    CHECK(state.nonempty_components() == 1);
    CHECK(state.assignments()[0] == 0);
  }
}

TEST_CASE("first link under a symmetric Dirichlet prior picks each component half the time") {
  auto net = Network::undirected(2, {{0, 1}});
  const int trials = 4000;
  for (auto path : {SamplingPath::flat, SamplingPath::tree}) {
    int zero = 0;
    for (int seed = 0; seed < trials; ++seed) {
      auto state = init_sequential(net, Hyperparameters::dirichlet(ModelKind::icmc, 2, 0.5, 0.1), seed, path);
      zero += state.assignments()[0] == 0;
    }
    CHECK(std::abs(zero - trials / 2.0) < 4.0 * std::sqrt(trials * 0.25));
  }
}

TEST_CASE("tables match a full recount after initialization and sweeps") {
  auto undirected = random_network(25, 150, 4);
  auto directed = random_network(25, 150, 5, true);
  for (const auto& hp : all_settings(6))
    for (auto path : {SamplingPath::flat, SamplingPath::tree}) {
      const Network& net = hp.model == ModelKind::icmc ? undirected : directed;
      SamplerState state(net, hp, 17, path);
      state.initialize();
      CHECK(state.counts_consistent());
      for (int s = 0; s < 10; ++s) state.sweep();
      CHECK(state.counts_consistent());
      if (hp.is_dp()) CHECK(state.nonempty_components() <= state.links().size());
    }
}

TEST_CASE("permuted link order leaves all invariants intact") {
  auto net = random_network(20, 80, 8);
  auto shuffled = net;
  Rng rng(1);
  rng.shuffle(shuffled.edges);
  for (const auto& hp : all_settings(3)) {
    auto a = init_sequential(net, hp, 5);
    auto b = init_sequential(shuffled, hp, 5);
    for (int s = 0; s < 5; ++s) {
      a.sweep();
      b.sweep();
    }
    CHECK(a.counts_consistent());
    CHECK(b.counts_consistent());
  }
}

TEST_CASE("DP reclaims emptied components") {
  auto net = random_network(12, 30, 6, false, false);
  auto hp = Hyperparameters::dp(ModelKind::icmc, 5.0, 0.5);
  auto state = init_sequential(net, hp, 2);
  bool shrank = false;
  std::size_t previous = state.nonempty_components();
  for (int s = 0; s < 50; ++s) {
    for (std::size_t l = 0; l < state.links().size(); ++l) {
      state.resample_link(l);
      const auto now = state.nonempty_components();
      if (now < previous) shrank = true;
      previous = now;
      std::set<ComponentId> used(state.assignments().begin(), state.assignments().end());
      CHECK(used.size() == now);
    }
  }
  CHECK(shrank);
  CHECK(state.counts_consistent());
  // Capacity stays bounded by the peak occupancy, not by the number of draws.
  CHECK(state.component_capacity() <= state.links().size());
}

TEST_CASE("DP two-link conditional join rate") {
  // Frozen from tests/oracle/derive_values.py (dp_two_link_join).
  const double expected = 0.39568345323741;
  auto net = Network::undirected(4, {{0, 1}, {2, 3}});
  for (auto model : {ModelKind::icmc}) {
    auto state = init_sequential(net, Hyperparameters::dp(model, 0.3, 0.3), 12);
    const int draws = 10000;
    int joined = 0;
    for (int d = 0; d < draws; ++d) {
      state.resample_link(0);
      joined += state.assignments()[0] == state.assignments()[1];
    }
    const double sigma = std::sqrt(draws * expected * (1 - expected));
    CHECK(std::abs(joined - draws * expected) < 4 * sigma);
  }
}

TEST_CASE("ICMc separates two bridged triangles in most chains") {
  auto net = two_triangles();
  // Judged on each chain's final state: with K = 2 the labels switch
  // within a chain, so averaging snapshots would blur a separated state.
  auto hp = Hyperparameters::dirichlet(ModelKind::icmc, 2, 0.5, 0.01);
  int separated = 0;
  for (std::uint64_t c = 0; c < 20; ++c) {
    auto r = run_chain(net, hp, {200, 199, 1, derive_seed(77, c)});
    auto m = snapshot_memberships(net, hp, r.snapshots.back().assignments, 2);
    auto left = m.row(0).maxCoeff() == m(0, 0) ? 0 : 1;
    bool ok = true;
    for (int i = 0; i < 6; ++i) {
      Eigen::Index arg;
      m.row(i).maxCoeff(&arg);
      ok &= (arg == left) == (i < 3);
    }
    separated += ok;
  }
  CHECK(separated > 10);
}

TEST_CASE("restore rebuilds tables and sampling structures") {
  auto net = random_network(10, 40, 9);
  for (const auto& hp : all_settings(3))
    for (auto path : {SamplingPath::flat, SamplingPath::tree}) {
      auto source = init_sequential(net, hp, 21, path);
      for (int s = 0; s < 3; ++s) source.sweep();
      SamplerState copy(net, hp, 21, path);
      copy.restore(source.assignments());
      CHECK(copy.initialized());
      CHECK(copy.counts_consistent());
      copy.sweep();
      CHECK(copy.counts_consistent());
    }
  SamplerState s(net, Hyperparameters::dirichlet(ModelKind::icmc, 2, 1, 1), 1);
  std::vector<ComponentId> bad(net.edges.size(), 2);
  CHECK_THROWS(s.restore(bad));
}

TEST_CASE("memberships average to distributions") {
  auto net = random_network(15, 60, 10, true);
  for (const auto& hp : {Hyperparameters::dirichlet(ModelKind::ssnlda, 3, 0.3, 0.1),
                         Hyperparameters::dp(ModelKind::ssnlda, 0.5, 0.1)}) {
    auto r = run_chain(net, hp, {30, 10, 5, 3});
    for (auto role : {MembershipRole::sender, MembershipRole::receiver}) {
      auto m = average_memberships(net, hp, r.snapshots, role);
      CHECK(m.rows() == 15);
      CHECK((m.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
      CHECK(m.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("new node prediction matches the two-link closed form") {
  // Old links (0,1) in component 0 and (2,3) in component 1; the new node
  // links to 0 then 2. Frozen from tests/oracle/derive_values.py.
  const Eigen::Vector2d branch0(0.6437146892655368, 0.35628531073446335);
  const Eigen::Vector2d branch1(0.46524931693989074, 0.5347506830601093);
  auto net = Network::undirected(4, {{0, 1}, {2, 3}});
  auto hp = Hyperparameters::dirichlet(ModelKind::icmc, 2, 0.5, 0.1);
  SamplerState state(net, hp, 1);
  const std::vector<ComponentId> z{0, 1};
  state.restore(z);
  const std::vector<NodeIndex> neighbors{0, 2};
  int hits0 = 0, hits1 = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    auto p = predict_new_node(state, neighbors, 0, rng);
    REQUIRE(p.size() == 2);
    if ((p - branch0).cwiseAbs().maxCoeff() < 1e-12) ++hits0;
    if ((p - branch1).cwiseAbs().maxCoeff() < 1e-12) ++hits1;
  }
  CHECK(hits0 + hits1 == 200);
  CHECK(hits0 > 0);
  CHECK(hits1 > 0);
  CHECK(state.counts_consistent());
}

TEST_CASE("one new link: refinement does not change the prediction") {
  auto net = two_triangles();
  auto hp = Hyperparameters::dirichlet(ModelKind::icmc, 2, 0.5, 0.01);
  SamplerState state(net, hp, 1);
  state.restore(std::vector<ComponentId>{0, 0, 0, 1, 1, 1, 0});
  const std::vector<NodeIndex> one{4};
  Rng a(1), b(2);
  auto p0 = predict_new_node(state, one, 0, a);
  auto p50 = predict_new_node(state, one, 50, b);
  CHECK((p0 - p50).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(p0[1] > 0.9);
  CHECK_THROWS(predict_new_node(state, std::vector<NodeIndex>{}, 0, a));
  CHECK_THROWS(predict_new_node(state, std::vector<NodeIndex>{6}, 0, a));
}

TEST_CASE("DP prediction may use a new component") {
  auto net = two_triangles();
  auto hp = Hyperparameters::dp(ModelKind::icmc, 0.3, 0.3);
  auto state = init_sequential(net, hp, 4);
  Rng rng(3);
  auto p = predict_new_node(state, std::vector<NodeIndex>{0, 5}, 3, rng);
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(static_cast<std::size_t>(p.size()) >= state.component_capacity());
}

TEST_CASE("suggested iteration heuristic") {
  CHECK(suggested_iterations(1000, 100.0) == static_cast<std::size_t>(std::ceil(100 * std::pow(std::log(1000.0), 2))));
  CHECK(suggested_iterations(1) > 0);
}
