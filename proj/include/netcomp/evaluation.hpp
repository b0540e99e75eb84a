#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netcomp/network.hpp"

namespace netcomp {

/// Membership mass per (true class, component): row c sums the membership
/// rows of the nodes labeled c. Unlabeled nodes are skipped.
Eigen::MatrixXd confusion(const Eigen::Ref<const Eigen::MatrixXd>& memberships, const GroundTruth& truth);

/// Cell smoothing applied before normalizing component columns.
inline constexpr double kPerplexitySmoothing = 1e-9;

/// exp of the mass-weighted cross-entropy of predicting a node's class from
/// its component, p(c | z) = counts(c, z) / sum_c' counts(c', z). Equals 1
/// for a perfect clustering and C when components carry no class signal.
double ground_truth_perplexity(const Eigen::Ref<const Eigen::MatrixXd>& confusion);

/// Argmax component per node; ties go to the lowest component id.
std::vector<std::uint32_t> hard_partition(const Eigen::Ref<const Eigen::MatrixXd>& memberships);

/// Newman-Girvan modularity sum_z (e_zz - a_z^2) of a node partition of an
/// undirected multigraph. Self-loops count as one edge with both ends in z.
double modularity(const Network& net, std::span<const std::uint32_t> partition);

/// Class partition of the ground truth; each unlabeled node forms its own block.
std::vector<std::uint32_t> truth_partition(const GroundTruth& truth);

/// Sample mean and Student-t confidence interval over chains.
struct ChainSummary {
  std::size_t chains = 0;
  double mean = 0.0;
  double standard_deviation = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;

  double half_width() const { return 0.5 * (ci_high - ci_low); }
};

ChainSummary summarize(std::span<const double> values, double level = 0.95);

/// Per-chain ground-truth perplexities of averaged memberships, summarized.
/// Components are not aligned across chains.
ChainSummary aggregate_chains(std::span<const Eigen::MatrixXd> chain_memberships, const GroundTruth& truth,
                              double level = 0.95);

/// Rows are true classes, columns components; header "class,z0,z1,...".
void write_confusion_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& confusion,
                         const std::vector<std::string>& class_names);

/// One "node,component,probability" row per nonzero membership entry.
void write_memberships_csv(std::ostream& out, const Network& net, const Eigen::Ref<const Eigen::MatrixXd>& memberships);

struct Scores {
  std::optional<double> perplexity;
  double modularity = 0.0;
  std::optional<ChainSummary> chains;
};

/// {"perplexity": ..., "modularity": ..., "ci": {...}}; absent parts are omitted.
void write_scores_json(std::ostream& out, const Scores& scores);

}  // namespace netcomp
