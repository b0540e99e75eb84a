#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "netcomp/counts.hpp"
#include "netcomp/hyperparameters.hpp"
#include "netcomp/kernels.hpp"
#include "netcomp/network.hpp"
#include "netcomp/partial_sum_tree.hpp"
#include "netcomp/rng.hpp"

namespace netcomp {

inline constexpr ComponentId kUnassigned = std::numeric_limits<ComponentId>::max();

/// How a link's component is drawn. `flat` scans every candidate component;
/// `tree` scores only components already present at the link's endpoints and
/// draws the rest from a partial-sum tree over per-component factors.
/// `automatic` picks flat for Dirichlet priors with K <= 64, tree otherwise.
enum class SamplingPath { automatic, flat, tree };

inline constexpr std::size_t kFlatPathMaxComponents = 64;

/// Links as the model sees them. ICMc uses the undirected edges as stored.
/// SSN-LDA uses directed edges as stored; an undirected edge {i, j} becomes
/// the two links i -> j and j -> i (a self-loop yields one link).
std::vector<Edge> model_links(const Network& net, ModelKind model);

/// Link assignments, count tables and sampling structures of one chain.
/// Not thread-safe; a state may move between threads between sweeps.
class SamplerState {
 public:
  SamplerState(const Network& net, const Hyperparameters& hp, std::uint64_t seed,
               SamplingPath path = SamplingPath::automatic);

  /// Populates empty urns by one pass over the links in the chain's fixed
  /// random order, conditioning each draw on the links seen so far.
  /// Returns the summed log-probability of the drawn assignments.
  double initialize();

  /// One Gibbs pass over all links in the fixed order. Returns the summed
  /// log-probability of the drawn assignments (leave-one-out log score).
  double sweep();

  /// Replaces all assignments (e.g. with a stored snapshot) and rebuilds
  /// the tables. The state counts as initialized afterwards. Under DP the
  /// ids may be arbitrary; unused ids below the largest become free ids.
  void restore(std::span<const ComponentId> assignments);

  /// Removes link l from the tables, redraws its component and adds it back.
  /// Returns the log-probability of the draw.
  double resample_link(std::size_t l);

  const Hyperparameters& hyperparameters() const { return hp_; }
  std::size_t node_count() const { return node_count_; }
  std::span<const Edge> links() const { return links_; }
  std::span<const ComponentId> assignments() const { return assignments_; }
  std::span<const std::uint32_t> order() const { return order_; }
  SamplingPath path() const { return path_; }
  bool initialized() const { return initialized_; }

  const IcmcCounts& icmc_counts() const;
  const LdaCounts& lda_counts() const;

  /// Component ids in use are < component_capacity().
  std::size_t component_capacity() const;
  std::size_t nonempty_components() const { return nonempty_; }
  std::uint32_t occupancy(ComponentId z) const;

  /// Recounts all tables from the assignments and compares exactly.
  bool counts_consistent() const;

  /// Bytes held by assignments, link storage, count tables and the tree.
  std::size_t memory_bytes() const;

  Rng& rng() { return rng_; }
  const PartialSumTree& tree() const { return tree_; }

 private:
  bool lda() const { return hp_.model == ModelKind::ssnlda; }
  ComponentId fresh_component() const;
  void ensure_capacity(ComponentId z);
  void add_link(std::size_t l, ComponentId z);
  void remove_link(std::size_t l);
  void refresh_component(ComponentId z);
  double background_weight(ComponentId z) const;
  ComponentId draw_flat(const Edge& link, double& log_p);
  ComponentId draw_tree(const Edge& link, double& log_p);
  double sparse_weight(ComponentId z, std::uint32_t k_first, std::uint32_t k_second, std::uint32_t sender_total,
                       bool self_link) const;

  Hyperparameters hp_;
  std::size_t node_count_;
  std::vector<Edge> links_;
  std::vector<ComponentId> assignments_;
  std::vector<std::uint32_t> order_;
  SamplingPath path_;
  Rng rng_;
  bool initialized_ = false;

  IcmcCounts icmc_;
  LdaCounts lda_;
  std::size_t nonempty_ = 0;
  std::priority_queue<ComponentId, std::vector<ComponentId>, std::greater<>> free_ids_;
  PartialSumTree tree_;

  // Scratch space reused across draws.
  std::vector<double> weights_;
  std::vector<std::uint32_t> first_counts_, second_counts_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t stamp_value_ = 0;
  std::vector<ComponentId> touched_;
  std::vector<double> touched_weight_;
};

/// Sweep schedule: `iterations` full sweeps after initialization; snapshots
/// are kept after sweeps burn_in + thinning, burn_in + 2 thinning, ...
struct ChainConfig {
  std::size_t iterations = 1;
  std::size_t burn_in = 0;
  std::size_t thinning = 1;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t snapshot_count() const { return (iterations - burn_in) / thinning; }
};

struct Snapshot {
  std::size_t sweep = 0;
  std::vector<ComponentId> assignments;
};

struct ChainResult {
  double initialization_score = 0.0;
  std::vector<double> trace;
  std::vector<Snapshot> snapshots;
};

SamplerState init_sequential(const Network& net, const Hyperparameters& hp, std::uint64_t seed,
                             SamplingPath path = SamplingPath::automatic);
double gibbs_sweep(SamplerState& state);
ChainResult run_chain(const Network& net, const Hyperparameters& hp, const ChainConfig& cfg,
                      SamplingPath path = SamplingPath::automatic);

/// Heuristic sweep budget c * log^2(M), exposed as a default only.
std::size_t suggested_iterations(std::size_t node_count, double c = 100.0);

/// Node memberships implied by one assignment snapshot (ICMc endpoint
/// shares, or SSN-LDA sender/receiver shares). Columns cover `components`.
Eigen::MatrixXd snapshot_memberships(const Network& net, const Hyperparameters& hp,
                                     std::span<const ComponentId> assignments, std::size_t components,
                                     MembershipRole role = MembershipRole::sender);

/// Column count needed to hold every component id used in `snapshots`.
std::size_t component_span(const Hyperparameters& hp, std::span<const Snapshot> snapshots);

/// Mean of snapshot_memberships over the snapshots.
Eigen::MatrixXd average_memberships(const Network& net, const Hyperparameters& hp, std::span<const Snapshot> snapshots,
                                    MembershipRole role = MembershipRole::sender);

/// Membership of a node that is not in the fitted network, given its links
/// to existing nodes. The new links are assigned one by one from the
/// collapsed conditional given the old links, then optionally refined by
/// `refine_sweeps` Gibbs passes over the new links only. The result is the
/// average of the new links' conditional component probabilities (the
/// Rao-Blackwellized share of the node's link endpoints per component).
/// The fitted state is not modified.
Eigen::VectorXd predict_new_node(const SamplerState& state, std::span<const NodeIndex> neighbors,
                                 std::size_t refine_sweeps, Rng& rng);

}  // namespace netcomp
