#include "netcomp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace netcomp {

std::vector<Edge> model_links(const Network& net, ModelKind model) {
  if (model == ModelKind::icmc || net.directed) return net.edges;
  std::vector<Edge> links;
  links.reserve(2 * net.edges.size());
  for (const Edge& e : net.edges) {
    links.push_back(e);
    if (e.source != e.target) links.push_back({e.target, e.source});
  }
  return links;
}

SamplerState::SamplerState(const Network& net, const Hyperparameters& hp, std::uint64_t seed, SamplingPath path)
    : hp_(hp), node_count_(net.node_count), path_(path), rng_(seed) {
  hp_.validate();
  net.validate();
  if (hp_.model == ModelKind::icmc && net.directed) throw std::invalid_argument("ICMc requires an undirected network");
  links_ = model_links(net, hp_.model);
  if (links_.empty()) throw EmptyNetworkError("network has no links");

  if (path_ == SamplingPath::automatic)
    path_ = !hp_.is_dp() && hp_.components <= kFlatPathMaxComponents ? SamplingPath::flat : SamplingPath::tree;

  const std::size_t initial = hp_.is_dp() ? 0 : hp_.components;
  if (lda())
    lda_ = LdaCounts(node_count_, initial);
  else
    icmc_ = IcmcCounts(node_count_, initial);

  assignments_.assign(links_.size(), kUnassigned);
  order_.resize(links_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  rng_.shuffle(order_);

  const std::size_t scratch = initial + 1;
  weights_.assign(scratch, 0.0);
  first_counts_.assign(scratch, 0);
  second_counts_.assign(scratch, 0);
  stamp_.assign(scratch, 0);

  if (path_ == SamplingPath::tree && !hp_.is_dp())
    for (ComponentId z = 0; z < hp_.components; ++z) tree_.update(z, background_weight(z));
}

const IcmcCounts& SamplerState::icmc_counts() const {
  if (lda()) throw std::logic_error("state holds SSN-LDA counts");
  return icmc_;
}

const LdaCounts& SamplerState::lda_counts() const {
  if (!lda()) throw std::logic_error("state holds ICMc counts");
  return lda_;
}

std::size_t SamplerState::component_capacity() const { return lda() ? lda_.capacity() : icmc_.capacity(); }

std::uint32_t SamplerState::occupancy(ComponentId z) const { return lda() ? lda_.occupancy(z) : icmc_.occupancy(z); }

ComponentId SamplerState::fresh_component() const {
  if (!free_ids_.empty()) return free_ids_.top();
  return static_cast<ComponentId>(component_capacity());
}

void SamplerState::ensure_capacity(ComponentId z) {
  if (lda())
    lda_.ensure_component(z);
  else
    icmc_.ensure_component(z);
  const std::size_t need = static_cast<std::size_t>(z) + 2;
  if (weights_.size() < need) {
    weights_.resize(need, 0.0);
    first_counts_.resize(need, 0);
    second_counts_.resize(need, 0);
    stamp_.resize(need, 0);
  }
}

double SamplerState::background_weight(ComponentId z) const {
  if (lda()) return hp_.beta / (lda_.occupancy(z) + static_cast<double>(node_count_) * hp_.beta);
  return icmc_weight<double>(0, 0, icmc_.occupancy(z), false, hp_, node_count_);
}

void SamplerState::refresh_component(ComponentId z) {
  if (path_ != SamplingPath::tree) return;
  if (hp_.is_dp() && occupancy(z) == 0)
    tree_.erase(z);
  else
    tree_.update(z, background_weight(z));
}

void SamplerState::add_link(std::size_t l, ComponentId z) {
  if (hp_.is_dp() && occupancy(z) == 0) {
    if (!free_ids_.empty() && free_ids_.top() == z)
      free_ids_.pop();
    else if (z != component_capacity())
      throw std::logic_error("DP state opened a component that is not the fresh id");
  }
  ensure_capacity(z);
  if (occupancy(z) == 0) ++nonempty_;
  if (lda())
    lda_.add(links_[l], z);
  else
    icmc_.add(links_[l], z);
  assignments_[l] = z;
  refresh_component(z);
}

void SamplerState::remove_link(std::size_t l) {
  const ComponentId z = assignments_[l];
  if (lda())
    lda_.remove(links_[l], z);
  else
    icmc_.remove(links_[l], z);
  assignments_[l] = kUnassigned;
  if (occupancy(z) == 0) {
    --nonempty_;
    if (hp_.is_dp()) free_ids_.push(z);
  }
  refresh_component(z);
}

double SamplerState::sparse_weight(ComponentId z, std::uint32_t k_first, std::uint32_t k_second,
                                   std::uint32_t sender_total, bool self_link) const {
  if (lda())
    return ssnlda_weight<double>(k_second, lda_.occupancy(z), k_first, sender_total, hp_, node_count_);
  return icmc_weight<double>(k_first, k_second, icmc_.occupancy(z), self_link, hp_, node_count_);
}

ComponentId SamplerState::draw_flat(const Edge& link, double& log_p) {
  const bool self_link = link.source == link.target;
  const SparseCountRow& first = lda() ? lda_.sender[link.source] : icmc_.endpoints[link.source];
  const SparseCountRow& second = lda() ? lda_.receiver[link.target] : icmc_.endpoints[link.target];
  const std::uint32_t sender_total = lda() ? lda_.sender_totals[link.source] : 0;

  for (const auto& e : first.entries()) first_counts_[e.component] = e.count;
  for (const auto& e : second.entries()) second_counts_[e.component] = e.count;

  const ComponentId fresh = hp_.is_dp() ? fresh_component() : kUnassigned;
  const std::size_t span = hp_.is_dp() ? std::max<std::size_t>(component_capacity(), fresh + 1) : hp_.components;

  double total = 0.0;
  for (ComponentId z = 0; z < span; ++z) {
    const bool candidate = !hp_.is_dp() || occupancy(z) > 0 || z == fresh;
    const double w =
        candidate ? sparse_weight(z, first_counts_[z], second_counts_[z], sender_total, self_link) : 0.0;
    weights_[z] = w;
    total += w;
  }

  for (const auto& e : first.entries()) first_counts_[e.component] = 0;
  for (const auto& e : second.entries()) second_counts_[e.component] = 0;

  const double u = rng_.uniform() * total;
  double acc = 0.0;
  ComponentId chosen = kUnassigned;
  for (ComponentId z = 0; z < span; ++z) {
    if (weights_[z] <= 0.0) continue;
    chosen = z;
    acc += weights_[z];
    if (u < acc) break;
  }
  log_p = std::log(weights_[chosen] / total);
  return chosen;
}

ComponentId SamplerState::draw_tree(const Edge& link, double& log_p) {
  const bool self_link = !lda() && link.source == link.target;
  const SparseCountRow& first = lda() ? lda_.sender[link.source] : icmc_.endpoints[link.source];
  const SparseCountRow& second = lda() ? lda_.receiver[link.target] : icmc_.endpoints[link.target];
  const std::uint32_t sender_total = lda() ? lda_.sender_totals[link.source] : 0;

  if (++stamp_value_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0u);
    stamp_value_ = 1;
  }
  touched_.clear();
  auto touch = [&](ComponentId z) {
    if (stamp_[z] == stamp_value_) return;
    stamp_[z] = stamp_value_;
    first_counts_[z] = 0;
    second_counts_[z] = 0;
    touched_.push_back(z);
  };
  for (const auto& e : first.entries()) {
    touch(e.component);
    first_counts_[e.component] = e.count;
  }
  for (const auto& e : second.entries()) {
    touch(e.component);
    second_counts_[e.component] = e.count;
  }
  std::sort(touched_.begin(), touched_.end());

  // Untouched components all carry scale * tree weight.
  double scale = 1.0;
  if (lda()) {
    const double denom = hp_.is_dp() ? sender_total + hp_.alpha
                                     : sender_total + static_cast<double>(hp_.components) * hp_.alpha;
    scale = hp_.alpha / denom;
  } else if (self_link) {
    scale = (1.0 + hp_.beta) / hp_.beta;
  }

  touched_weight_.resize(touched_.size());
  double correction_total = 0.0;
  for (std::size_t t = 0; t < touched_.size(); ++t) {
    const ComponentId z = touched_[t];
    const double w = sparse_weight(z, first_counts_[z], second_counts_[z], sender_total, self_link);
    touched_weight_[t] = w;
    weights_[t] = std::max(0.0, w - scale * tree_.weight(z));
    correction_total += weights_[t];
  }

  const double background_total = scale * tree_.total();
  const ComponentId fresh = hp_.is_dp() ? fresh_component() : kUnassigned;
  const double fresh_weight = hp_.is_dp() ? sparse_weight(fresh, 0, 0, sender_total, self_link) : 0.0;
  const double total = correction_total + background_total + fresh_weight;

  const double u = rng_.uniform() * total;
  ComponentId chosen = kUnassigned;
  double chosen_weight = 0.0;
  if (u < correction_total) {
    double acc = 0.0;
    for (std::size_t t = 0; t < touched_.size(); ++t) {
      if (weights_[t] <= 0.0) continue;
      chosen = touched_[t];
      chosen_weight = touched_weight_[t];
      acc += weights_[t];
      if (u < acc) break;
    }
  } else if (!hp_.is_dp() || u < correction_total + background_total) {
    chosen = tree_.sample((u - correction_total) / scale);
    if (stamp_[chosen] == stamp_value_) {
      auto it = std::lower_bound(touched_.begin(), touched_.end(), chosen);
      chosen_weight = touched_weight_[static_cast<std::size_t>(it - touched_.begin())];
    } else {
      chosen_weight = scale * tree_.weight(chosen);
    }
  } else {
    chosen = fresh;
    chosen_weight = fresh_weight;
  }
  log_p = std::log(chosen_weight / total);
  return chosen;
}

double SamplerState::resample_link(std::size_t l) {
  if (l >= links_.size()) throw std::out_of_range("link index out of range");
  if (assignments_[l] != kUnassigned) remove_link(l);
  double log_p = 0.0;
  const ComponentId z = path_ == SamplingPath::flat ? draw_flat(links_[l], log_p) : draw_tree(links_[l], log_p);
  add_link(l, z);
  return log_p;
}

double SamplerState::initialize() {
  if (initialized_) throw std::logic_error("state is already initialized");
  double score = 0.0;
  for (std::uint32_t l : order_) score += resample_link(l);
  initialized_ = true;
  return score;
}

double SamplerState::sweep() {
  if (!initialized_) throw std::logic_error("sweep before initialization");
  double score = 0.0;
  for (std::uint32_t l : order_) score += resample_link(l);
  return score;
}

void SamplerState::restore(std::span<const ComponentId> assignments) {
  if (assignments.size() != links_.size()) throw std::invalid_argument("snapshot does not match the network");
  for (ComponentId z : assignments) {
    if (z == kUnassigned) throw std::invalid_argument("snapshot holds an unassigned link");
    if (!hp_.is_dp() && z >= hp_.components) throw std::invalid_argument("snapshot component exceeds K");
  }
  const std::size_t initial = hp_.is_dp() ? 0 : hp_.components;
  if (lda())
    lda_ = LdaCounts(node_count_, initial);
  else
    icmc_ = IcmcCounts(node_count_, initial);
  assignments_.assign(assignments.begin(), assignments.end());
  nonempty_ = 0;
  free_ids_ = {};
  tree_.clear();
  for (std::size_t l = 0; l < links_.size(); ++l) {
    ensure_capacity(assignments_[l]);
    if (occupancy(assignments_[l]) == 0) ++nonempty_;
    if (lda())
      lda_.add(links_[l], assignments_[l]);
    else
      icmc_.add(links_[l], assignments_[l]);
  }
  const auto capacity = static_cast<ComponentId>(component_capacity());
  for (ComponentId z = 0; z < capacity; ++z) {
    if (hp_.is_dp() && occupancy(z) == 0) free_ids_.push(z);
    refresh_component(z);
  }
  initialized_ = true;
}

bool SamplerState::counts_consistent() const {
  for (ComponentId z : assignments_)
    if (z == kUnassigned) return false;
  const std::size_t capacity = component_capacity();
  std::size_t nonempty = 0;
  for (ComponentId z = 0; z < capacity; ++z)
    if (occupancy(z) > 0) ++nonempty;
  if (nonempty != nonempty_) return false;

  if (lda()) {
    if (!(tally_lda(node_count_, links_, assignments_, capacity) == lda_)) return false;
  } else {
    if (!(tally_icmc(node_count_, links_, assignments_, capacity) == icmc_)) return false;
    if (!endpoint_identity_holds(icmc_)) return false;
  }

  if (path_ == SamplingPath::tree) {
    if (!tree_.check_invariants()) return false;
    for (ComponentId z = 0; z < capacity; ++z) {
      const bool present = !hp_.is_dp() || occupancy(z) > 0;
      const double expected = present ? background_weight(z) : 0.0;
      if (tree_.weight(z) != expected) return false;
    }
  }
  return true;
}

std::size_t SamplerState::memory_bytes() const {
  std::size_t bytes = links_.capacity() * sizeof(Edge) + assignments_.capacity() * sizeof(ComponentId) +
                      order_.capacity() * sizeof(std::uint32_t);
  if (lda()) {
    for (const auto& row : lda_.sender) bytes += sizeof(SparseCountRow) + row.memory_bytes();
    for (const auto& row : lda_.receiver) bytes += sizeof(SparseCountRow) + row.memory_bytes();
    bytes += (lda_.sender_totals.capacity() + lda_.receiver_totals.capacity()) * sizeof(std::uint32_t);
  } else {
    for (const auto& row : icmc_.endpoints) bytes += sizeof(SparseCountRow) + row.memory_bytes();
    bytes += icmc_.links.capacity() * sizeof(std::uint32_t);
  }
  bytes += tree_.memory_bytes() + free_ids_.size() * sizeof(ComponentId);
  bytes += weights_.capacity() * sizeof(double) + touched_weight_.capacity() * sizeof(double) +
           (first_counts_.capacity() + second_counts_.capacity() + stamp_.capacity() + touched_.capacity()) *
               sizeof(std::uint32_t);
  return bytes;
}

void ChainConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (burn_in >= iterations) throw std::invalid_argument("burn-in must be smaller than iterations");
  if (thinning < 1) throw std::invalid_argument("thinning must be at least 1");
  if (thinning > iterations - burn_in) throw std::invalid_argument("thinning exceeds the post-burn-in sweep count");
}

SamplerState init_sequential(const Network& net, const Hyperparameters& hp, std::uint64_t seed, SamplingPath path) {
  SamplerState state(net, hp, seed, path);
  state.initialize();
  return state;
}

double gibbs_sweep(SamplerState& state) { return state.sweep(); }

ChainResult run_chain(const Network& net, const Hyperparameters& hp, const ChainConfig& cfg, SamplingPath path) {
  cfg.validate();
  SamplerState state(net, hp, cfg.seed, path);
  ChainResult result;
  result.initialization_score = state.initialize();
  result.trace.reserve(cfg.iterations);
  result.snapshots.reserve(cfg.snapshot_count());
  for (std::size_t s = 1; s <= cfg.iterations; ++s) {
    result.trace.push_back(state.sweep());
    if (s > cfg.burn_in && (s - cfg.burn_in) % cfg.thinning == 0)
      result.snapshots.push_back({s, {state.assignments().begin(), state.assignments().end()}});
  }
  return result;
}

std::size_t suggested_iterations(std::size_t node_count, double c) {
  const double lg = std::log(static_cast<double>(std::max<std::size_t>(node_count, 2)));
  return static_cast<std::size_t>(std::ceil(c * lg * lg));
}

Eigen::MatrixXd snapshot_memberships(const Network& net, const Hyperparameters& hp,
                                     std::span<const ComponentId> assignments, std::size_t components,
                                     MembershipRole role) {
  const auto links = model_links(net, hp.model);
  if (links.size() != assignments.size()) throw std::invalid_argument("snapshot does not match the network");
  if (hp.model == ModelKind::icmc) return icmc_memberships(tally_icmc(net.node_count, links, assignments), components);
  return ssnlda_memberships(tally_lda(net.node_count, links, assignments), role, components);
}

std::size_t component_span(const Hyperparameters& hp, std::span<const Snapshot> snapshots) {
  std::size_t span = hp.is_dp() ? 0 : hp.components;
  for (const auto& s : snapshots)
    for (ComponentId z : s.assignments) span = std::max<std::size_t>(span, static_cast<std::size_t>(z) + 1);
  return span;
}

Eigen::MatrixXd average_memberships(const Network& net, const Hyperparameters& hp, std::span<const Snapshot> snapshots,
                                    MembershipRole role) {
  if (snapshots.empty()) throw std::invalid_argument("no snapshots to average");
  const std::size_t span = component_span(hp, snapshots);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(net.node_count), static_cast<Eigen::Index>(span));
  for (const auto& s : snapshots) sum += snapshot_memberships(net, hp, s.assignments, span, role);
  return sum / static_cast<double>(snapshots.size());
}

namespace {

// Conditional component probabilities of one new link given every other
// link, over ids [0, span). DP candidates are the nonempty components plus
// the smallest empty id.
template <class Counts>
Eigen::VectorXd new_link_conditional(const Counts& counts, const Edge& link, const Hyperparameters& hp,
                                     std::size_t node_count, std::size_t span) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(span));
  bool fresh_used = false;
  for (ComponentId z = 0; z < span; ++z) {
    const bool open = counts.occupancy(z) > 0;
    if (hp.is_dp() && !open) {
      if (fresh_used) continue;
      fresh_used = true;
    }
    if constexpr (std::is_same_v<Counts, IcmcCounts>)
      p[z] = z < counts.capacity() ? icmc_weight(counts, z, link.source, link.target, hp, node_count)
                                   : icmc_weight<double>(0, 0, 0, link.source == link.target, hp, node_count);
    else
      p[z] = z < counts.capacity() ? ssnlda_weight(counts, z, link.source, link.target, hp, node_count)
                                   : ssnlda_weight<double>(0, 0, 0, counts.sender_totals[link.source], hp, node_count);
  }
  return p / p.sum();
}

ComponentId draw_index(const Eigen::VectorXd& p, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  ComponentId last = 0;
  for (Eigen::Index z = 0; z < p.size(); ++z) {
    if (p[z] <= 0.0) continue;
    last = static_cast<ComponentId>(z);
    acc += p[z];
    if (u < acc) break;
  }
  return last;
}

template <class Counts>
Eigen::VectorXd predict_with(Counts counts, const Hyperparameters& hp, std::size_t old_nodes,
                             std::span<const NodeIndex> neighbors, std::size_t refine_sweeps, Rng& rng) {
  const std::size_t node_count = old_nodes + 1;
  const auto new_node = static_cast<NodeIndex>(old_nodes);
  if constexpr (std::is_same_v<Counts, IcmcCounts>) {
    counts.endpoints.emplace_back();
  } else {
    counts.sender.emplace_back();
    counts.sender_totals.push_back(0);
    counts.receiver.emplace_back();
  }

  // Ids beyond the current capacity can only be opened one at a time, so
  // capacity + links bounds every id in use.
  const std::size_t span = hp.is_dp() ? counts.capacity() + neighbors.size() : counts.capacity();
  std::vector<Edge> links;
  for (NodeIndex j : neighbors) {
    if (j >= old_nodes) throw std::out_of_range("new link references an unknown node");
    links.push_back({new_node, j});
  }
  std::vector<ComponentId> z(links.size());

  Eigen::VectorXd accumulated = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(span));
  for (std::size_t t = 0; t < links.size(); ++t) {
    Eigen::VectorXd p = new_link_conditional(counts, links[t], hp, node_count, span);
    z[t] = draw_index(p, rng);
    counts.add(links[t], z[t]);
    if (refine_sweeps == 0) accumulated += p;
  }
  for (std::size_t s = 0; s < refine_sweeps; ++s)
    for (std::size_t t = 0; t < links.size(); ++t) {
      counts.remove(links[t], z[t]);
      Eigen::VectorXd p = new_link_conditional(counts, links[t], hp, node_count, span);
      z[t] = draw_index(p, rng);
      counts.add(links[t], z[t]);
      accumulated += p;
    }
  const double passes = static_cast<double>(std::max<std::size_t>(refine_sweeps, 1));
  return accumulated / (passes * static_cast<double>(links.size()));
}

}  // namespace

Eigen::VectorXd predict_new_node(const SamplerState& state, std::span<const NodeIndex> neighbors,
                                 std::size_t refine_sweeps, Rng& rng) {
  if (neighbors.empty()) throw std::invalid_argument("a new node needs at least one link");
  if (!state.initialized()) throw std::logic_error("prediction needs an initialized state");
  const auto& hp = state.hyperparameters();
  if (hp.model == ModelKind::icmc)
    return predict_with(state.icmc_counts(), hp, state.node_count(), neighbors, refine_sweeps, rng);
  return predict_with(state.lda_counts(), hp, state.node_count(), neighbors, refine_sweeps, rng);
}

}  // namespace netcomp
