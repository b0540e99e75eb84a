#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "netcomp/evaluation.hpp"
#include "netcomp/network.hpp"
#include "netcomp/rng.hpp"

using namespace netcomp;

namespace {

GroundTruth truth_of(std::vector<std::optional<std::uint32_t>> classes, std::size_t class_count) {
  GroundTruth t;
  t.class_of = std::move(classes);
  for (std::size_t c = 0; c < class_count; ++c) t.class_names.push_back("c" + std::to_string(c));
  return t;
}

}  // namespace

TEST_CASE("confusion of a hand-computed 4-node case") {
  Eigen::MatrixXd m(4, 2);
  m << 0.9, 0.1,  //
      0.6, 0.4,   //
      0.2, 0.8,   //
      0.5, 0.5;
  auto t = truth_of({0, 0, 1, 1}, 2);
  auto c = confusion(m, t);
  CHECK(c(0, 0) == doctest::Approx(1.5));
  CHECK(c(0, 1) == doctest::Approx(0.5));
  CHECK(c(1, 0) == doctest::Approx(0.7));
  CHECK(c(1, 1) == doctest::Approx(1.3));
  CHECK(c.sum() == doctest::Approx(4.0));
}

TEST_CASE("confusion skips unlabeled nodes") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  auto c = confusion(m, truth_of({1, std::nullopt, 0}, 2));
  CHECK(c.sum() == doctest::Approx(2.0));
  CHECK(c(1, 0) == 1.0);
  CHECK(c(0, 2) == 1.0);
  CHECK_THROWS(confusion(m, truth_of({std::nullopt, std::nullopt, std::nullopt}, 0)));
}

TEST_CASE("perfect and uninformative clusterings") {
  Eigen::MatrixXd perfect(6, 3);
  perfect.setZero();
  for (int i = 0; i < 6; ++i) perfect(i, (i + 1) % 3) = 1.0;
  auto t = truth_of({0, 1, 2, 0, 1, 2}, 3);
  auto c = confusion(perfect, t);
  CHECK(ground_truth_perplexity(c) == doctest::Approx(1.0).epsilon(1e-8));
  for (Eigen::Index r = 0; r < 3; ++r) CHECK((c.row(r).array() > 0).count() == 1);

  Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(6, 2, 0.5);
  auto u = confusion(uniform, t);
  CHECK(u.col(0).isApprox(u.col(1)));
  CHECK(ground_truth_perplexity(u) == doctest::Approx(3.0).epsilon(1e-8));
  CHECK_THROWS(ground_truth_perplexity(Eigen::MatrixXd::Zero(2, 2)));
}

TEST_CASE("perplexity is invariant under label permutations and at least one") {
  Eigen::MatrixXd c(3, 4);
  c << 4, 1, 0, 2,  //
      0, 3, 1, 1,   //
      1, 0, 5, 0.5;
  const double p = ground_truth_perplexity(c);
  CHECK(p >= 1.0);
  Eigen::MatrixXd cols = c(Eigen::all, std::vector<int>{2, 0, 3, 1});
  Eigen::MatrixXd rows = c(std::vector<int>{1, 2, 0}, Eigen::all);
  CHECK(ground_truth_perplexity(cols) == doctest::Approx(p).epsilon(1e-12));
  CHECK(ground_truth_perplexity(rows) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("hard partition breaks ties toward the lowest component") {
  Eigen::MatrixXd m(3, 3);
  m << 0.2, 0.4, 0.4,  //
      0.5, 0.5, 0.0,   //
      0.1, 0.1, 0.8;
  CHECK(hard_partition(m) == std::vector<std::uint32_t>{1, 0, 2});
}

TEST_CASE("modularity basics") {
  auto net = Network::undirected(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}});
  const std::vector<std::uint32_t> one(6, 0);
  CHECK(modularity(net, one) == doctest::Approx(0.0).epsilon(1e-15));
  const std::vector<std::uint32_t> split{0, 0, 0, 1, 1, 1};
  // e = 3/7 each, a = 7/14 each.
  CHECK(modularity(net, split) == doctest::Approx(6.0 / 7.0 - 0.5).epsilon(1e-14));
  const std::vector<std::uint32_t> relabeled{5, 5, 5, 2, 2, 2};
  CHECK(modularity(net, relabeled) == doctest::Approx(modularity(net, split)).epsilon(1e-15));
  const std::vector<std::uint32_t> singletons{0, 1, 2, 3, 4, 5};
  const double q = modularity(net, singletons);
  CHECK(q >= -1.0);
  CHECK(q < 0.0);
  CHECK_THROWS(modularity(Network::directed_from(2, {{0, 1}}), std::vector<std::uint32_t>{0, 0}));
}

TEST_CASE("karate ground-truth modularity") {
  // Frozen from tests/oracle/derive_values.py (networkx modularity).
  auto net = load_edge_list(std::string(NETCOMP_DATA_DIR) + "/karate.edges", false);
  auto truth = load_labels(std::string(NETCOMP_DATA_DIR) + "/karate.labels", net);
  CHECK(modularity(net, truth_partition(truth)) == doctest::Approx(0.3582347140039448).epsilon(1e-12));
}

TEST_CASE("chain summaries") {
  const std::vector<double> same{2.5, 2.5, 2.5};
  auto s = summarize(same);
  CHECK(s.mean == 2.5);
  CHECK(s.half_width() == 0.0);

  const std::vector<double> two{2.0, 4.0};
  CHECK(summarize(two).mean == 3.0);

  // Frozen from tests/oracle/derive_values.py (scipy t quantile).
  const std::vector<double> five{1, 2, 3, 4, 5};
  CHECK(summarize(five).half_width() == doctest::Approx(1.9632431614775607).epsilon(1e-12));
  CHECK_THROWS(summarize(std::vector<double>{1.0}));
}

TEST_CASE("aggregate chains of memberships") {
  auto t = truth_of({0, 0, 1, 1}, 2);
  Eigen::MatrixXd perfect(4, 2);
  perfect << 1, 0, 1, 0, 0, 1, 0, 1;
  Eigen::MatrixXd swapped(4, 2);
  swapped << 0, 1, 0, 1, 1, 0, 1, 0;
  const std::vector<Eigen::MatrixXd> chains{perfect, swapped};
  auto s = aggregate_chains(chains, t);
  CHECK(s.mean == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.half_width() < 1e-8);
}

TEST_CASE("confidence interval narrows like one over root n") {
  Rng rng(4);
  auto width = [&](std::size_t n) {
    double total = 0.0;
    for (int rep = 0; rep < 400; ++rep) {
      std::vector<double> v(n);
      for (auto& x : v) x = rng.uniform();
      total += summarize(v).half_width();
    }
    return total / 400;
  };
  const double ratio = width(10) / width(40);
  // Includes the t-quantile shrinkage from 9 to 39 degrees of freedom.
  CHECK(ratio == doctest::Approx(2.0 * 2.262 / 2.023).epsilon(0.1));
}

TEST_CASE("CSV and JSON outputs") {
  Eigen::MatrixXd c(2, 2);
  c << 1.5, 0.5, 0.25, 2;
  std::ostringstream csv;
  write_confusion_csv(csv, c, {"red", "blue"});
  CHECK(csv.str() == "class,z0,z1\nred,1.5,0.5\nblue,0.25,2\n");

  auto net = Network::undirected(2, {{0, 1}});
  net.node_labels = {"a", "b"};
  Eigen::MatrixXd m(2, 2);
  m << 1, 0, 0.25, 0.75;
  std::ostringstream mem;
  write_memberships_csv(mem, net, m);
  CHECK(mem.str() == "node,component,probability\na,0,1\nb,0,0.25\nb,1,0.75\n");

  Scores scores;
  scores.modularity = 0.5;
  std::ostringstream js;
  write_scores_json(js, scores);
  auto j = nlohmann::json::parse(js.str());
  CHECK(j["modularity"] == 0.5);
  CHECK_FALSE(j.contains("perplexity"));
  scores.perplexity = 1.25;
  scores.chains = summarize(std::vector<double>{1.0, 1.5});
  std::ostringstream js2;
  write_scores_json(js2, scores);
  auto k = nlohmann::json::parse(js2.str());
  CHECK(k["perplexity"] == 1.25);
  CHECK(k["ci"]["chains"] == 2);
}
