#pragma once

// Collapsed conditional weights of a left-out link, node memberships and
// parameter reconstruction for ICMc and SSN-LDA. Weights are unnormalized:
// factors that do not depend on the component are kept only where the
// formula is conventionally written with them, and every caller normalizes.

#include <Eigen/Dense>
#include <cstdint>

#include "netcomp/counts.hpp"
#include "netcomp/hyperparameters.hpp"
#include "netcomp/rng.hpp"

namespace netcomp {

/// Chinese-restaurant weight: occupancy for a used component, the
/// concentration for a new one.
template <class Scalar = double>
constexpr Scalar chooser(std::uint64_t n, Scalar alpha_dp) {
  return n != 0 ? static_cast<Scalar>(n) : alpha_dp;
}

/// ICMc weight of component z for link (i, j) from counts that exclude the
/// link. `k_first`/`k_second` are k'_zi and k'_zj, `n` is n'_z. For a
/// self-link the second endpoint is drawn after the first one has been
/// added, so its factor reads k'_zi + 1 + beta.
template <class Scalar = double>
Scalar icmc_weight(std::uint64_t k_first, std::uint64_t k_second, std::uint64_t n, bool self_link,
                   const Hyperparameters& hp, std::size_t node_count) {
  const Scalar beta = hp.beta;
  const Scalar m_beta = static_cast<Scalar>(node_count) * beta;
  const Scalar two_n = 2 * static_cast<Scalar>(n);
  const Scalar first = static_cast<Scalar>(k_first) + beta;
  const Scalar second = self_link ? static_cast<Scalar>(k_first) + 1 + beta : static_cast<Scalar>(k_second) + beta;
  const Scalar component = hp.is_dp() ? chooser<Scalar>(n, static_cast<Scalar>(hp.alpha))
                                      : static_cast<Scalar>(n) + static_cast<Scalar>(hp.alpha);
  return first * second * component / ((two_n + 1 + m_beta) * (two_n + m_beta));
}

/// SSN-LDA weight of component z for directed link i -> j from counts that
/// exclude the link: k'_zj, k'_z., n'_iz, n'_i.. Under the DP prior the
/// sender denominator is n'_i. + alpha, which is constant over z.
template <class Scalar = double>
Scalar ssnlda_weight(std::uint64_t k_receiver, std::uint64_t k_component_total, std::uint64_t n_sender,
                     std::uint64_t n_sender_total, const Hyperparameters& hp, std::size_t node_count) {
  const Scalar beta = hp.beta;
  const Scalar alpha = hp.alpha;
  const Scalar receiver = (static_cast<Scalar>(k_receiver) + beta) /
                          (static_cast<Scalar>(k_component_total) + static_cast<Scalar>(node_count) * beta);
  if (hp.is_dp())
    return receiver * chooser<Scalar>(n_sender, alpha) / (static_cast<Scalar>(n_sender_total) + alpha);
  const Scalar k = static_cast<Scalar>(hp.components);
  return receiver * (static_cast<Scalar>(n_sender) + alpha) / (static_cast<Scalar>(n_sender_total) + k * alpha);
}

double icmc_weight(const IcmcCounts& counts, ComponentId z, NodeIndex i, NodeIndex j, const Hyperparameters& hp,
                   std::size_t node_count);
double ssnlda_weight(const LdaCounts& counts, ComponentId z, NodeIndex i, NodeIndex j, const Hyperparameters& hp,
                     std::size_t node_count);

enum class MembershipRole { sender, receiver };

/// k_zi / sum_z k_zi over `components` entries. A node without links gets a
/// uniform vector over the nonempty components.
Eigen::VectorXd node_membership_icmc(const IcmcCounts& counts, NodeIndex i, std::size_t components);

/// n_iz / n_i. (sender) or k_zj / k_.j (receiver).
Eigen::VectorXd node_membership_ssnlda(const LdaCounts& counts, NodeIndex node, MembershipRole role,
                                       std::size_t components);

/// Memberships of every node as rows of a node x component matrix.
Eigen::MatrixXd icmc_memberships(const IcmcCounts& counts, std::size_t components);
Eigen::MatrixXd ssnlda_memberships(const LdaCounts& counts, MembershipRole role, std::size_t components);

enum class ReconstructionMode { expectation, sample };

/// Mixing weights and per-component node distributions. For the DP prior
/// `residual` carries the mass of all empty components together.
struct IcmcParameters {
  Eigen::VectorXd theta;
  double residual = 0.0;
  Eigen::MatrixXd m;  // component x node
};

/// SSN-LDA parameters: per-sender mixing rows and per-component receiver
/// distributions. `residual` holds each sender's new-component mass (DP).
struct LdaParameters {
  Eigen::MatrixXd theta;  // node x component
  Eigen::VectorXd residual;
  Eigen::MatrixXd m;  // component x node
};

/// Posterior expectations of theta and m given counts, or one draw from the
/// conditional Dirichlet distributions (`rng` required in sample mode).
IcmcParameters reconstruct_parameters(const IcmcCounts& counts, const Hyperparameters& hp, std::size_t node_count,
                                      ReconstructionMode mode, Rng* rng = nullptr);
LdaParameters reconstruct_parameters(const LdaCounts& counts, const Hyperparameters& hp, std::size_t node_count,
                                     ReconstructionMode mode, Rng* rng = nullptr);

/// Exact Bayes-rule membership theta_z m_zi / sum_z' theta_z' m_z'i.
Eigen::VectorXd bayes_membership(const IcmcParameters& params, NodeIndex i);

/// Draw from Dirichlet(concentrations); zero concentrations yield zero mass.
Eigen::VectorXd sample_dirichlet(const Eigen::Ref<const Eigen::VectorXd>& concentrations, Rng& rng);

}  // namespace netcomp
