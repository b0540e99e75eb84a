#include "netcomp/kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace netcomp {

namespace {

Eigen::VectorXd normalized_row(const SparseCountRow& row, std::size_t components,
                               const std::vector<std::uint32_t>& occupancy) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(components));
  double total = 0.0;
  for (const auto& e : row.entries()) {
    if (e.component >= components) throw std::out_of_range("membership dimension smaller than component ids");
    p[e.component] += e.count;
    total += e.count;
  }
  if (total > 0.0) return p / total;

  std::size_t nonempty = 0;
  for (std::size_t z = 0; z < components; ++z)
    if (z < occupancy.size() && occupancy[z] > 0) {
      p[static_cast<Eigen::Index>(z)] = 1.0;
      ++nonempty;
    }
  if (nonempty == 0) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(components), 1.0 / components);
  return p / static_cast<double>(nonempty);
}

Eigen::MatrixXd dense_receiver_counts(const std::vector<SparseCountRow>& rows, std::size_t components) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(components), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& e : rows[i].entries()) k(e.component, static_cast<Eigen::Index>(i)) = e.count;
  return k;
}

Eigen::MatrixXd node_distributions(const Eigen::MatrixXd& k, double beta, ReconstructionMode mode, Rng* rng) {
  Eigen::MatrixXd m(k.rows(), k.cols());
  for (Eigen::Index z = 0; z < k.rows(); ++z) {
    Eigen::VectorXd conc = k.row(z).transpose().array() + beta;
    if (mode == ReconstructionMode::expectation)
      m.row(z) = (conc / conc.sum()).transpose();
    else
      m.row(z) = sample_dirichlet(conc, *rng).transpose();
  }
  return m;
}

void require_rng(ReconstructionMode mode, const Rng* rng) {
  if (mode == ReconstructionMode::sample && rng == nullptr)
    throw std::invalid_argument("sample mode requires a random generator");
}

}  // namespace

double icmc_weight(const IcmcCounts& counts, ComponentId z, NodeIndex i, NodeIndex j, const Hyperparameters& hp,
                   std::size_t node_count) {
  return icmc_weight<double>(counts.endpoints[i].get(z), counts.endpoints[j].get(z), counts.occupancy(z), i == j, hp,
                             node_count);
}

double ssnlda_weight(const LdaCounts& counts, ComponentId z, NodeIndex i, NodeIndex j, const Hyperparameters& hp,
                     std::size_t node_count) {
  return ssnlda_weight<double>(counts.receiver[j].get(z), counts.occupancy(z), counts.sender[i].get(z),
                               counts.sender_totals[i], hp, node_count);
}

Eigen::VectorXd node_membership_icmc(const IcmcCounts& counts, NodeIndex i, std::size_t components) {
  return normalized_row(counts.endpoints[i], components, counts.links);
}

Eigen::VectorXd node_membership_ssnlda(const LdaCounts& counts, NodeIndex node, MembershipRole role,
                                       std::size_t components) {
  const auto& row = role == MembershipRole::sender ? counts.sender[node] : counts.receiver[node];
  return normalized_row(row, components, counts.receiver_totals);
}

Eigen::MatrixXd icmc_memberships(const IcmcCounts& counts, std::size_t components) {
  Eigen::MatrixXd p(static_cast<Eigen::Index>(counts.endpoints.size()), static_cast<Eigen::Index>(components));
  for (NodeIndex i = 0; i < counts.endpoints.size(); ++i) p.row(i) = node_membership_icmc(counts, i, components);
  return p;
}

Eigen::MatrixXd ssnlda_memberships(const LdaCounts& counts, MembershipRole role, std::size_t components) {
  Eigen::MatrixXd p(static_cast<Eigen::Index>(counts.sender.size()), static_cast<Eigen::Index>(components));
  for (NodeIndex i = 0; i < counts.sender.size(); ++i) p.row(i) = node_membership_ssnlda(counts, i, role, components);
  return p;
}

Eigen::VectorXd sample_dirichlet(const Eigen::Ref<const Eigen::VectorXd>& concentrations, Rng& rng) {
  Eigen::VectorXd draw(concentrations.size());
  for (Eigen::Index z = 0; z < concentrations.size(); ++z)
    draw[z] = concentrations[z] > 0.0 ? rng.gamma(concentrations[z]) : 0.0;
  const double total = draw.sum();
  if (!(total > 0.0)) throw std::invalid_argument("Dirichlet draw needs a positive concentration");
  return draw / total;
}

IcmcParameters reconstruct_parameters(const IcmcCounts& counts, const Hyperparameters& hp,
                                      [[maybe_unused]] std::size_t node_count, ReconstructionMode mode, Rng* rng) {
  require_rng(mode, rng);
  const std::size_t components = hp.is_dp() ? counts.capacity() : std::max(hp.components, counts.capacity());
  const auto ncomp = static_cast<Eigen::Index>(components);
  Eigen::VectorXd n = Eigen::VectorXd::Zero(ncomp);
  for (std::size_t z = 0; z < counts.capacity(); ++z) n[static_cast<Eigen::Index>(z)] = counts.links[z];

  IcmcParameters params;
  if (!hp.is_dp()) {
    Eigen::VectorXd conc = n.array() + hp.alpha;
    params.theta = mode == ReconstructionMode::expectation ? Eigen::VectorXd(conc / conc.sum())
                                                           : sample_dirichlet(conc, *rng);
  } else {
    // Nonempty components keep their occupancy; the last bin is alpha.
    Eigen::VectorXd conc(ncomp + 1);
    conc << n, hp.alpha;
    Eigen::VectorXd full = mode == ReconstructionMode::expectation ? Eigen::VectorXd(conc / conc.sum())
                                                                   : sample_dirichlet(conc, *rng);
    params.theta = full.head(ncomp);
    params.residual = full[ncomp];
  }

  Eigen::MatrixXd k = dense_receiver_counts(counts.endpoints, components);
  params.m = node_distributions(k, hp.beta, mode, rng);
  return params;
}

LdaParameters reconstruct_parameters(const LdaCounts& counts, const Hyperparameters& hp, std::size_t node_count,
                                     ReconstructionMode mode, Rng* rng) {
  require_rng(mode, rng);
  const std::size_t components = hp.is_dp() ? counts.capacity() : std::max(hp.components, counts.capacity());
  const auto ncomp = static_cast<Eigen::Index>(components);
  const auto nodes = static_cast<Eigen::Index>(node_count);

  LdaParameters params;
  params.theta = Eigen::MatrixXd::Zero(nodes, ncomp);
  params.residual = Eigen::VectorXd::Zero(nodes);
  for (Eigen::Index i = 0; i < nodes; ++i) {
    Eigen::VectorXd n = Eigen::VectorXd::Zero(ncomp);
    for (const auto& e : counts.sender[static_cast<std::size_t>(i)].entries()) n[e.component] = e.count;
    if (!hp.is_dp()) {
      Eigen::VectorXd conc = n.array() + hp.alpha;
      params.theta.row(i) = (mode == ReconstructionMode::expectation ? Eigen::VectorXd(conc / conc.sum())
                                                                      : sample_dirichlet(conc, *rng))
                                .transpose();
    } else {
      Eigen::VectorXd conc(ncomp + 1);
      conc << n, hp.alpha;
      Eigen::VectorXd full = mode == ReconstructionMode::expectation ? Eigen::VectorXd(conc / conc.sum())
                                                                     : sample_dirichlet(conc, *rng);
      params.theta.row(i) = full.head(ncomp).transpose();
      params.residual[i] = full[ncomp];
    }
  }

  Eigen::MatrixXd k = dense_receiver_counts(counts.receiver, components);
  params.m = node_distributions(k, hp.beta, mode, rng);
  return params;
}

Eigen::VectorXd bayes_membership(const IcmcParameters& params, NodeIndex i) {
  Eigen::VectorXd p = params.theta.array() * params.m.col(i).array();
  return p / p.sum();
}

}  // namespace netcomp
