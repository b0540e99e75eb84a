#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace netcomp {

enum class ModelKind { icmc, ssnlda };
enum class PriorKind { dirichlet, dirichlet_process };

/// Prior configuration shared by both models. `alpha` is the symmetric
/// Dirichlet parameter or the DP concentration depending on `prior`;
/// `components` is only meaningful for the finite Dirichlet prior.
struct Hyperparameters {
  ModelKind model = ModelKind::icmc;
  PriorKind prior = PriorKind::dirichlet;
  std::size_t components = 1;
  double alpha = 1.0;
  double beta = 0.01;

  bool is_dp() const { return prior == PriorKind::dirichlet_process; }

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (prior == PriorKind::dirichlet && components < 1)
      throw std::invalid_argument("component count must be at least 1");
  }

  static Hyperparameters dirichlet(ModelKind model, std::size_t k, double alpha, double beta) {
    Hyperparameters hp{model, PriorKind::dirichlet, k, alpha, beta};
    hp.validate();
    return hp;
  }

  static Hyperparameters dp(ModelKind model, double alpha, double beta) {
    Hyperparameters hp{model, PriorKind::dirichlet_process, 0, alpha, beta};
    hp.validate();
    return hp;
  }
};

inline std::string_view to_string(ModelKind m) { return m == ModelKind::icmc ? "icmc" : "ssnlda"; }
inline std::string_view to_string(PriorKind p) { return p == PriorKind::dirichlet ? "dirichlet" : "dp"; }

inline ModelKind parse_model(std::string_view s) {
  if (s == "icmc") return ModelKind::icmc;
  if (s == "ssnlda" || s == "ssn-lda") return ModelKind::ssnlda;
  throw std::invalid_argument("unknown model '" + std::string(s) + "'");
}

inline PriorKind parse_prior(std::string_view s) {
  if (s == "dirichlet") return PriorKind::dirichlet;
  if (s == "dp") return PriorKind::dirichlet_process;
  throw std::invalid_argument("unknown prior '" + std::string(s) + "'");
}

}  // namespace netcomp
