#include "netcomp/evaluation.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <json.hpp>
#include <ostream>
#include <stdexcept>

namespace netcomp {

Eigen::MatrixXd confusion(const Eigen::Ref<const Eigen::MatrixXd>& memberships, const GroundTruth& truth) {
  if (memberships.cols() < 1) throw std::invalid_argument("confusion needs at least one component");
  if (static_cast<std::size_t>(memberships.rows()) != truth.class_of.size())
    throw std::invalid_argument("membership rows do not match the labeled network");
  if (truth.labeled_count() == 0) throw std::invalid_argument("confusion needs at least one labeled node");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(truth.class_count()), memberships.cols());
  for (Eigen::Index i = 0; i < memberships.rows(); ++i)
    if (const auto& c = truth.class_of[static_cast<std::size_t>(i)]) counts.row(*c) += memberships.row(i);
  return counts;
}

double ground_truth_perplexity(const Eigen::Ref<const Eigen::MatrixXd>& confusion) {
  const double mass = confusion.sum();
  if (!(mass > 0.0)) throw std::invalid_argument("perplexity of an all-zero confusion matrix");
  if ((confusion.array() < 0.0).any()) throw std::invalid_argument("confusion entries must be nonnegative");
  const Eigen::ArrayXXd smoothed = confusion.array() + kPerplexitySmoothing;
  const Eigen::RowVectorXd column = smoothed.matrix().colwise().sum();
  const Eigen::ArrayXXd log_p = (smoothed.rowwise() / column.array()).log();
  return std::exp(-(confusion.array() * log_p).sum() / mass);
}

std::vector<std::uint32_t> hard_partition(const Eigen::Ref<const Eigen::MatrixXd>& memberships) {
  std::vector<std::uint32_t> part(static_cast<std::size_t>(memberships.rows()));
  for (Eigen::Index i = 0; i < memberships.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index z = 1; z < memberships.cols(); ++z)
      if (memberships(i, z) > memberships(i, best)) best = z;
    part[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(best);
  }
  return part;
}

double modularity(const Network& net, std::span<const std::uint32_t> partition) {
  if (net.directed) throw std::invalid_argument("modularity needs an undirected network");
  if (net.edges.empty()) throw std::invalid_argument("modularity needs at least one edge");
  if (partition.size() != net.node_count) throw std::invalid_argument("partition size does not match the network");
  std::uint32_t blocks = 0;
  for (auto z : partition) blocks = std::max(blocks, z + 1);
  Eigen::VectorXd inside = Eigen::VectorXd::Zero(blocks);
  Eigen::VectorXd ends = Eigen::VectorXd::Zero(blocks);
  for (const Edge& e : net.edges) {
    const auto a = partition[e.source], b = partition[e.target];
    ends[a] += 1.0;
    ends[b] += 1.0;
    if (a == b) inside[a] += 1.0;
  }
  const double links = static_cast<double>(net.edges.size());
  return (inside / links).sum() - (ends / (2.0 * links)).squaredNorm();
}

std::vector<std::uint32_t> truth_partition(const GroundTruth& truth) {
  std::vector<std::uint32_t> part(truth.class_of.size());
  auto next = static_cast<std::uint32_t>(truth.class_count());
  for (std::size_t i = 0; i < part.size(); ++i) part[i] = truth.class_of[i] ? *truth.class_of[i] : next++;
  return part;
}

ChainSummary summarize(std::span<const double> values, double level) {
  if (values.size() < 2) throw std::invalid_argument("a confidence interval needs at least two chains");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  ChainSummary s;
  s.chains = values.size();
  s.level = level;
  const Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  s.mean = v.mean();
  const double n = static_cast<double>(values.size());
  s.standard_deviation = std::sqrt((v.array() - s.mean).square().sum() / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - level) / 2.0));
  const double half = t * s.standard_deviation / std::sqrt(n);
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  return s;
}

ChainSummary aggregate_chains(std::span<const Eigen::MatrixXd> chain_memberships, const GroundTruth& truth,
                              double level) {
  std::vector<double> perplexities;
  perplexities.reserve(chain_memberships.size());
  for (const auto& m : chain_memberships) perplexities.push_back(ground_truth_perplexity(confusion(m, truth)));
  return summarize(perplexities, level);
}

void write_confusion_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& confusion,
                         const std::vector<std::string>& class_names) {
  out << "class";
  for (Eigen::Index z = 0; z < confusion.cols(); ++z) out << ",z" << z;
  out << '\n';
  out.precision(17);
  for (Eigen::Index c = 0; c < confusion.rows(); ++c) {
    const auto idx = static_cast<std::size_t>(c);
    out << (idx < class_names.size() ? class_names[idx] : std::to_string(c));
    for (Eigen::Index z = 0; z < confusion.cols(); ++z) out << ',' << confusion(c, z);
    out << '\n';
  }
}

void write_memberships_csv(std::ostream& out, const Network& net, const Eigen::Ref<const Eigen::MatrixXd>& memberships) {
  out << "node,component,probability\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < memberships.rows(); ++i)
    for (Eigen::Index z = 0; z < memberships.cols(); ++z)
      if (memberships(i, z) != 0.0)
        out << net.label_of(static_cast<NodeIndex>(i)) << ',' << z << ',' << memberships(i, z) << '\n';
}

void write_scores_json(std::ostream& out, const Scores& scores) {
  nlohmann::json j;
  if (scores.perplexity) j["perplexity"] = *scores.perplexity;
  j["modularity"] = scores.modularity;
  if (scores.chains) {
    const auto& c = *scores.chains;
    j["ci"] = {{"chains", c.chains}, {"mean", c.mean},     {"sd", c.standard_deviation},
               {"low", c.ci_low},    {"high", c.ci_high}, {"level", c.level}};
  }
  out << j.dump(2) << '\n';
}

}  // namespace netcomp
