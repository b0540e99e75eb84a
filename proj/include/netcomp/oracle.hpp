#pragma once

// Brute-force reference for tiny instances: exact collapsed joints,
// leave-one-out conditionals obtained as ratios of joints, and the full
// posterior by enumeration. Independent of the sampler's count tables.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "netcomp/counts.hpp"
#include "netcomp/hyperparameters.hpp"
#include "netcomp/network.hpp"

namespace netcomp {

struct TinyInstance {
  std::vector<Edge> links;  // model links (see model_links)
  std::size_t node_count = 0;
  Hyperparameters hp;

  static TinyInstance from_network(const Network& net, const Hyperparameters& hp);
};

/// log p(L, Z | alpha, beta) for ICMc, Dirichlet or DP prior, including the
/// Dirichlet normalizers. Under DP the prior is the CRP partition law.
double icmc_log_joint(std::span<const ComponentId> assignments, std::span<const Edge> links, std::size_t node_count,
                      const Hyperparameters& hp);

/// Collapsed LDA joint with senders as documents and receivers as words
/// (Dirichlet prior only).
double ssnlda_log_joint(std::span<const ComponentId> assignments, std::span<const Edge> links, std::size_t node_count,
                        const Hyperparameters& hp);

double log_joint(const TinyInstance& inst, std::span<const ComponentId> assignments);

/// Components link l may take given the others: 0..K-1 under Dirichlet;
/// under DP every id used by another link plus the smallest unused id.
/// The returned vectors below are indexed by component id over
/// candidate_span(), with zeros at non-candidates.
std::size_t candidate_span(const TinyInstance& inst, std::span<const ComponentId> assignments, std::size_t l);

/// p(z_l = z | everything else) from ratios of joints.
Eigen::VectorXd exact_conditional(const TinyInstance& inst, std::span<const ComponentId> assignments, std::size_t l);

/// ICMc DP conditional written as the product of the three sequential urn
/// predictives (component, first endpoint, second endpoint).
Eigen::VectorXd urn_conditional_icmc_dp(const TinyInstance& inst, std::span<const ComponentId> assignments,
                                        std::size_t l);

/// Unnormalized ICMc weight function with the signature of icmc_weight<double>.
using IcmcKernel = std::function<double(std::uint64_t k_first, std::uint64_t k_second, std::uint64_t n,
                                        bool self_link, const Hyperparameters&, std::size_t node_count)>;

/// Normalized model-kernel conditional computed from counts with link l
/// removed. `icmc_kernel` replaces the ICMc weight when set.
Eigen::VectorXd kernel_conditional(const TinyInstance& inst, std::span<const ComponentId> assignments, std::size_t l,
                                   const IcmcKernel& icmc_kernel = {});

/// Relabels components in order of first appearance, the canonical form of
/// a partition.
std::vector<ComponentId> canonical_labels(std::span<const ComponentId> assignments);

struct PosteriorEntry {
  std::vector<ComponentId> assignments;
  double probability = 0.0;
};

class EnumerationBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kEnumerationBudget = 1'000'000;

/// Normalized posterior over labeled assignments (Dirichlet) or over set
/// partitions in canonical labels (DP).
std::vector<PosteriorEntry> enumerate_posterior(const TinyInstance& inst, std::size_t budget = kEnumerationBudget);

/// Sizes and tolerances of the kernel-versus-joint equivalence suite.
struct OracleSuiteOptions {
  std::size_t instances = 1000;
  std::size_t max_links = 6;
  std::size_t max_nodes = 5;
  std::size_t max_components = 3;
  double min_hyper = 0.05;
  double max_hyper = 2.0;
  std::uint64_t seed = 1;
  IcmcKernel icmc_kernel;  // empty: the library kernel
};

/// Largest absolute deviation seen per check.
struct OracleSuiteReport {
  std::size_t instances = 0;
  std::size_t conditionals = 0;
  double icmc_dirichlet = 0.0;
  double icmc_dp = 0.0;
  double icmc_dp_routes = 0.0;
  double ssnlda_dirichlet = 0.0;
};

/// Random tiny instances (self-links included), random full assignments,
/// every link's conditional compared.
OracleSuiteReport run_oracle_suite(const OracleSuiteOptions& options);

/// Largest relative gap between the Dirichlet weight ratio of two nonempty
/// components at alpha_Dir = alpha_DP / K and the DP ratio, over a grid of
/// counts.
double large_k_consistency(std::size_t components, double alpha_dp, double beta, std::size_t node_count);

}  // namespace netcomp
