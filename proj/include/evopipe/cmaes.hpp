#pragma once

#include <span>
#include <vector>

#include "evopipe/rng.hpp"

namespace evopipe {

struct CmaConfig {
  int dimension = 0;
  int population_size = 50;
  double initial_sigma = 0.1;
  std::vector<double> initial_mean;  // empty means the zero vector
};

// Full mutable state, used for exact checkpoint resume. The recombination
// weights and learning rates are recomputed from (dimension,
// population_size) on restore; the eigendecomposition is refreshed from the
// covariance.
struct CmaSnapshot {
  int dimension = 0;
  int population_size = 0;
  int generation = 0;
  double sigma = 0.0;
  long eigen_repairs = 0;
  std::vector<double> mean;
  std::vector<double> path_sigma;
  std::vector<double> path_cov;
  std::vector<double> covariance;  // row-major dimension x dimension
};

// Standard (mu/mu_w, lambda) CMA-ES with rank-1 plus rank-mu covariance
// update and cumulative step-size adaptation; mu = lambda/2 with
// log-decreasing weights. Ranks by descending fitness (maximization).
class CmaEs {
 public:
  explicit CmaEs(const CmaConfig& cfg);

  // Samples population_size candidates mean + sigma * C^(1/2) z.
  std::vector<std::vector<double>> ask(Rng& rng) const;

  // Updates mean, paths, covariance and step size from the ranked
  // candidates. Throws on non-finite fitness (naming the candidate index)
  // and if the state itself goes non-finite.
  void tell(const std::vector<std::vector<double>>& candidates, std::span<const double> fitness);

  int dimension() const { return n_; }
  int population_size() const { return lambda_; }
  int generation() const { return generation_; }
  double sigma() const { return sigma_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& covariance() const { return cov_; }
  double min_eigenvalue() const { return min_eigenvalue_; }
  long eigen_repairs() const { return eigen_repairs_; }

  CmaSnapshot snapshot() const;
  static CmaEs restore(const CmaSnapshot& s);

 private:
  CmaEs() = default;
  void init_strategy_parameters();
  void refresh_eigensystem();

  int n_ = 0;
  int lambda_ = 0;
  int mu_ = 0;
  int generation_ = 0;
  double sigma_ = 0.0;
  double mu_eff_ = 0.0;
  double c_sigma_ = 0.0;
  double d_sigma_ = 0.0;
  double c_c_ = 0.0;
  double c_1_ = 0.0;
  double c_mu_ = 0.0;
  double chi_n_ = 0.0;
  double min_eigenvalue_ = 0.0;
  long eigen_repairs_ = 0;
  std::vector<double> weights_;
  std::vector<double> mean_;
  std::vector<double> path_sigma_;
  std::vector<double> path_cov_;
  std::vector<double> cov_;        // C, row-major
  std::vector<double> eigvec_;     // B, row-major
  std::vector<double> eig_sqrt_;   // D = sqrt(eigenvalues)
};

}  // namespace evopipe
