#include "netcomp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "netcomp/kernels.hpp"
#include "netcomp/rng.hpp"
#include "netcomp/sampler.hpp"

namespace netcomp {

namespace {

// Sufficient statistics recomputed from scratch with ordered maps, so the
// oracle shares no code with the sampler's sparse tables.
struct DenseTally {
  std::map<ComponentId, std::uint64_t> links;                          // n_z
  std::map<std::pair<ComponentId, NodeIndex>, std::uint64_t> endpoint;  // k_zi (ICMc) or k_zj (LDA receiver)
  std::map<std::pair<NodeIndex, ComponentId>, std::uint64_t> sender;    // n_iz (LDA)
  std::map<NodeIndex, std::uint64_t> sender_total;                     // n_i.
};

DenseTally tally(std::span<const ComponentId> z, std::span<const Edge> links, bool lda) {
  DenseTally t;
  for (std::size_t l = 0; l < links.size(); ++l) {
    ++t.links[z[l]];
    if (lda) {
      ++t.endpoint[{z[l], links[l].target}];
      ++t.sender[{links[l].source, z[l]}];
      ++t.sender_total[links[l].source];
    } else {
      ++t.endpoint[{z[l], links[l].source}];
      ++t.endpoint[{z[l], links[l].target}];
    }
  }
  return t;
}

double lg(double x) { return std::lgamma(x); }

Eigen::VectorXd normalize_logs(const std::vector<double>& logs, const std::vector<bool>& candidate) {
  double top = -INFINITY;
  for (std::size_t z = 0; z < logs.size(); ++z)
    if (candidate[z]) top = std::max(top, logs[z]);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(logs.size()));
  for (std::size_t z = 0; z < logs.size(); ++z)
    if (candidate[z]) p[static_cast<Eigen::Index>(z)] = std::exp(logs[z] - top);
  return p / p.sum();
}

std::vector<bool> candidates(const TinyInstance& inst, std::span<const ComponentId> z, std::size_t l,
                             std::size_t span) {
  std::vector<bool> c(span, !inst.hp.is_dp());
  if (!inst.hp.is_dp()) return c;
  std::set<ComponentId> used;
  for (std::size_t m = 0; m < z.size(); ++m)
    if (m != l) used.insert(z[m]);
  ComponentId fresh = 0;
  while (used.count(fresh)) ++fresh;
  for (ComponentId u : used) c[u] = true;
  c[fresh] = true;
  return c;
}

}  // namespace

TinyInstance TinyInstance::from_network(const Network& net, const Hyperparameters& hp) {
  hp.validate();
  return {model_links(net, hp.model), net.node_count, hp};
}

double icmc_log_joint(std::span<const ComponentId> assignments, std::span<const Edge> links, std::size_t node_count,
                      const Hyperparameters& hp) {
  if (assignments.size() != links.size()) throw std::invalid_argument("assignment length does not match links");
  const DenseTally t = tally(assignments, links, false);
  const double m = static_cast<double>(node_count);
  const double beta = hp.beta, alpha = hp.alpha;
  const double n_total = static_cast<double>(links.size());

  // Node-distribution factor of every nonempty component; empty ones are 1.
  double log_p = 0.0;
  for (const auto& [z, n] : t.links) {
    log_p += lg(m * beta) - m * lg(beta) - lg(2.0 * static_cast<double>(n) + m * beta);
    for (const auto& [key, k] : t.endpoint)
      if (key.first == z) log_p += lg(static_cast<double>(k) + beta);
    log_p += (m - static_cast<double>(std::count_if(t.endpoint.begin(), t.endpoint.end(),
                                                    [z = z](const auto& e) { return e.first.first == z; }))) *
             lg(beta);
  }

  if (hp.is_dp()) {
    log_p += static_cast<double>(t.links.size()) * std::log(alpha) + lg(alpha) - lg(alpha + n_total);
    for (const auto& [z, n] : t.links) log_p += lg(static_cast<double>(n));
  } else {
    const double k = static_cast<double>(hp.components);
    for (const auto& [z, n] : t.links)
      if (z >= hp.components) throw std::out_of_range("assignment outside the K components");
    log_p += lg(k * alpha) - k * lg(alpha) - lg(n_total + k * alpha);
    for (const auto& [z, n] : t.links) log_p += lg(static_cast<double>(n) + alpha);
    log_p += (k - static_cast<double>(t.links.size())) * lg(alpha);
  }
  return log_p;
}

double ssnlda_log_joint(std::span<const ComponentId> assignments, std::span<const Edge> links, std::size_t node_count,
                        const Hyperparameters& hp) {
  if (hp.is_dp()) throw std::invalid_argument("the SSN-LDA joint is implemented for the Dirichlet prior only");
  if (assignments.size() != links.size()) throw std::invalid_argument("assignment length does not match links");
  const DenseTally t = tally(assignments, links, true);
  const double m = static_cast<double>(node_count);
  const double k = static_cast<double>(hp.components);
  const double alpha = hp.alpha, beta = hp.beta;

  double log_p = 0.0;
  for (const auto& [i, total] : t.sender_total) {
    log_p += lg(k * alpha) - lg(static_cast<double>(total) + k * alpha);
    for (const auto& [key, n] : t.sender)
      if (key.first == i) log_p += lg(static_cast<double>(n) + alpha) - lg(alpha);
  }
  for (const auto& [z, n] : t.links) {
    if (z >= hp.components) throw std::out_of_range("assignment outside the K components");
    log_p += lg(m * beta) - lg(static_cast<double>(n) + m * beta);
    for (const auto& [key, c] : t.endpoint)
      if (key.first == z) log_p += lg(static_cast<double>(c) + beta) - lg(beta);
  }
  return log_p;
}

double log_joint(const TinyInstance& inst, std::span<const ComponentId> assignments) {
  if (inst.hp.model == ModelKind::icmc) return icmc_log_joint(assignments, inst.links, inst.node_count, inst.hp);
  return ssnlda_log_joint(assignments, inst.links, inst.node_count, inst.hp);
}

std::size_t candidate_span(const TinyInstance& inst, std::span<const ComponentId> assignments, std::size_t l) {
  if (!inst.hp.is_dp()) return inst.hp.components;
  std::set<ComponentId> used;
  for (std::size_t m = 0; m < assignments.size(); ++m)
    if (m != l) used.insert(assignments[m]);
  ComponentId fresh = 0;
  while (used.count(fresh)) ++fresh;
  const std::size_t top = used.empty() ? 0 : *used.rbegin() + 1;
  return std::max<std::size_t>(top, fresh + 1);
}

Eigen::VectorXd exact_conditional(const TinyInstance& inst, std::span<const ComponentId> assignments, std::size_t l) {
  const std::size_t span = candidate_span(inst, assignments, l);
  const auto cand = candidates(inst, assignments, l, span);
  std::vector<ComponentId> z(assignments.begin(), assignments.end());
  std::vector<double> logs(span, 0.0);
  for (std::size_t c = 0; c < span; ++c) {
    if (!cand[c]) continue;
    z[l] = static_cast<ComponentId>(c);
    logs[c] = log_joint(inst, z);
  }
  return normalize_logs(logs, cand);
}

Eigen::VectorXd urn_conditional_icmc_dp(const TinyInstance& inst, std::span<const ComponentId> assignments,
                                        std::size_t l) {
  if (inst.hp.model != ModelKind::icmc || !inst.hp.is_dp())
    throw std::invalid_argument("urn conditional is the ICMc DP form");
  const std::size_t span = candidate_span(inst, assignments, l);
  const auto cand = candidates(inst, assignments, l, span);
  std::vector<ComponentId> others;
  std::vector<Edge> other_links;
  for (std::size_t m = 0; m < assignments.size(); ++m)
    if (m != l) {
      others.push_back(assignments[m]);
      other_links.push_back(inst.links[m]);
    }
  const DenseTally t = tally(others, other_links, false);
  const Edge e = inst.links[l];
  const double beta = inst.hp.beta, alpha = inst.hp.alpha;
  const double mb = static_cast<double>(inst.node_count) * beta;
  const double n_rest = static_cast<double>(others.size());

  auto lookup = [](const auto& map, const auto& key) -> double {
    auto it = map.find(key);
    return it == map.end() ? 0.0 : static_cast<double>(it->second);
  };
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(span));
  for (std::size_t c = 0; c < span; ++c) {
    if (!cand[c]) continue;
    const auto z = static_cast<ComponentId>(c);
    const double n = lookup(t.links, z);
    const double pick = (n > 0.0 ? n : alpha) / (n_rest + alpha);
    const double ki = lookup(t.endpoint, std::pair{z, e.source});
    const double first = (ki + beta) / (2.0 * n + mb);
    const double kj = lookup(t.endpoint, std::pair{z, e.target}) + (e.source == e.target ? 1.0 : 0.0);
    const double second = (kj + beta) / (2.0 * n + 1.0 + mb);
    p[static_cast<Eigen::Index>(c)] = pick * first * second;
  }
  return p / p.sum();
}

Eigen::VectorXd kernel_conditional(const TinyInstance& inst, std::span<const ComponentId> assignments, std::size_t l,
                                   const IcmcKernel& icmc_kernel) {
  const std::size_t span = candidate_span(inst, assignments, l);
  const auto cand = candidates(inst, assignments, l, span);
  std::vector<ComponentId> others;
  std::vector<Edge> other_links;
  for (std::size_t m = 0; m < assignments.size(); ++m)
    if (m != l) {
      others.push_back(assignments[m]);
      other_links.push_back(inst.links[m]);
    }
  const Edge e = inst.links[l];
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(span));
  if (inst.hp.model == ModelKind::icmc) {
    const IcmcCounts counts = tally_icmc(inst.node_count, other_links, others, span);
    for (ComponentId z = 0; z < span; ++z) {
      if (!cand[z]) continue;
      const auto ki = counts.endpoints[e.source].get(z), kj = counts.endpoints[e.target].get(z);
      const bool self = e.source == e.target;
      w[z] = icmc_kernel ? icmc_kernel(ki, kj, counts.occupancy(z), self, inst.hp, inst.node_count)
                         : icmc_weight(counts, z, e.source, e.target, inst.hp, inst.node_count);
    }
  } else {
    const LdaCounts counts = tally_lda(inst.node_count, other_links, others, span);
    for (ComponentId z = 0; z < span; ++z)
      if (cand[z]) w[z] = ssnlda_weight(counts, z, e.source, e.target, inst.hp, inst.node_count);
  }
  return w / w.sum();
}

std::vector<ComponentId> canonical_labels(std::span<const ComponentId> assignments) {
  std::map<ComponentId, ComponentId> relabel;
  std::vector<ComponentId> out;
  out.reserve(assignments.size());
  for (ComponentId z : assignments) {
    auto [it, inserted] = relabel.try_emplace(z, static_cast<ComponentId>(relabel.size()));
    out.push_back(it->second);
  }
  return out;
}

std::vector<PosteriorEntry> enumerate_posterior(const TinyInstance& inst, std::size_t budget) {
  const std::size_t links = inst.links.size();
  if (links == 0) throw std::invalid_argument("enumeration needs at least one link");

  std::vector<std::vector<ComponentId>> states;
  std::vector<ComponentId> z(links, 0);
  if (!inst.hp.is_dp()) {
    const std::size_t k = inst.hp.components;
    std::size_t count = 1;
    for (std::size_t l = 0; l < links; ++l) {
      if (count > budget / k) throw EnumerationBudgetExceeded("K^L exceeds the enumeration budget");
      count *= k;
    }
    if (count > budget) throw EnumerationBudgetExceeded("K^L exceeds the enumeration budget");
    states.reserve(count);
    for (;;) {
      states.push_back(z);
      std::size_t l = links;
      while (l > 0 && z[l - 1] + 1 == k) z[--l] = 0;
      if (l == 0) break;
      ++z[l - 1];
    }
  } else {
    // Restricted growth strings: z_0 = 0, z_l <= 1 + max(z_0..z_{l-1}).
    std::vector<ComponentId> top(links, 0);
    for (;;) {
      if (states.size() >= budget) throw EnumerationBudgetExceeded("partition count exceeds the enumeration budget");
      states.push_back(z);
      std::size_t l = links;
      while (l > 1 && z[l - 1] == top[l - 1] + 1) --l;
      if (l <= 1) break;
      ++z[l - 1];
      for (std::size_t m = l; m < links; ++m) {
        top[m] = std::max(top[m - 1], z[m - 1]);
        z[m] = 0;
      }
    }
  }

  std::vector<double> logs(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) logs[s] = log_joint(inst, states[s]);
  const double peak = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (double& v : logs) total += (v = std::exp(v - peak));
  std::vector<PosteriorEntry> out(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) out[s] = {std::move(states[s]), logs[s] / total};
  return out;
}

OracleSuiteReport run_oracle_suite(const OracleSuiteOptions& options) {
  Rng rng(options.seed);
  OracleSuiteReport report;
  auto draw_hyper = [&] { return options.min_hyper + (options.max_hyper - options.min_hyper) * rng.uniform(); };
  auto gap = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); };

  for (std::size_t n = 0; n < options.instances; ++n) {
    const std::size_t nodes = 1 + rng.below(options.max_nodes);
    const std::size_t link_count = 1 + rng.below(options.max_links);
    const std::size_t k = 1 + rng.below(options.max_components);
    const double alpha = draw_hyper(), beta = draw_hyper();

    std::vector<Edge> undirected, directed;
    for (std::size_t l = 0; l < link_count; ++l) {
      auto a = static_cast<NodeIndex>(rng.below(nodes)), b = static_cast<NodeIndex>(rng.below(nodes));
      directed.push_back({a, b});
      undirected.push_back({std::min(a, b), std::max(a, b)});
    }

    auto check = [&](const TinyInstance& inst, double& worst, double* route_worst) {
      std::vector<ComponentId> z(link_count);
      for (auto& v : z)
        v = static_cast<ComponentId>(inst.hp.is_dp() ? rng.below(link_count) : rng.below(inst.hp.components));
      for (std::size_t l = 0; l < link_count; ++l) {
        const Eigen::VectorXd exact = exact_conditional(inst, z, l);
        worst = std::max(worst, gap(kernel_conditional(inst, z, l, options.icmc_kernel), exact));
        if (route_worst) *route_worst = std::max(*route_worst, gap(urn_conditional_icmc_dp(inst, z, l), exact));
        ++report.conditionals;
      }
    };

    check({undirected, nodes, Hyperparameters::dirichlet(ModelKind::icmc, k, alpha, beta)}, report.icmc_dirichlet,
          nullptr);
    check({undirected, nodes, Hyperparameters::dp(ModelKind::icmc, alpha, beta)}, report.icmc_dp,
          &report.icmc_dp_routes);
    check({directed, nodes, Hyperparameters::dirichlet(ModelKind::ssnlda, k, alpha, beta)}, report.ssnlda_dirichlet,
          nullptr);
    ++report.instances;
  }
  return report;
}

double large_k_consistency(std::size_t components, double alpha_dp, double beta, std::size_t node_count) {
  const auto dir = Hyperparameters::dirichlet(ModelKind::icmc, components, alpha_dp / static_cast<double>(components), beta);
  const auto dp = Hyperparameters::dp(ModelKind::icmc, alpha_dp, beta);
  double worst = 0.0;
  for (std::uint64_t n1 = 1; n1 <= 6; ++n1)
    for (std::uint64_t n2 = 1; n2 <= 6; ++n2)
      for (std::uint64_t k1 = 0; k1 <= 2; ++k1)
        for (std::uint64_t k2 = 0; k2 <= 2; ++k2) {
          const double r_dir = icmc_weight<double>(k1, k2, n1, false, dir, node_count) /
                               icmc_weight<double>(k2, k1, n2, false, dir, node_count);
          const double r_dp = icmc_weight<double>(k1, k2, n1, false, dp, node_count) /
                              icmc_weight<double>(k2, k1, n2, false, dp, node_count);
          worst = std::max(worst, std::abs(r_dir / r_dp - 1.0));
        }
  return worst;
}

}  // namespace netcomp
