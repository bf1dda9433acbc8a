#include "evopipe/cmaes.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace evopipe {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMatrix>;
using MapConstMat = Eigen::Map<const RowMatrix>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using MapConstVec = Eigen::Map<const Eigen::VectorXd>;

}  // namespace

CmaEs::CmaEs(const CmaConfig& cfg) {
  if (cfg.dimension < 1) throw std::invalid_argument("cmaes: dimension must be >= 1");
  if (cfg.population_size < 2) throw std::invalid_argument("cmaes: population_size must be >= 2");
  if (!(cfg.initial_sigma > 0.0)) throw std::invalid_argument("cmaes: initial_sigma must be > 0");
  if (!cfg.initial_mean.empty() && cfg.initial_mean.size() != static_cast<std::size_t>(cfg.dimension))
    throw std::invalid_argument("cmaes: initial_mean length must equal dimension");

  n_ = cfg.dimension;
  lambda_ = cfg.population_size;
  sigma_ = cfg.initial_sigma;
  mean_ = cfg.initial_mean.empty() ? std::vector<double>(static_cast<std::size_t>(n_), 0.0) : cfg.initial_mean;
  path_sigma_.assign(static_cast<std::size_t>(n_), 0.0);
  path_cov_.assign(static_cast<std::size_t>(n_), 0.0);
  cov_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
  for (int i = 0; i < n_; ++i) cov_[static_cast<std::size_t>(i) * n_ + i] = 1.0;
  init_strategy_parameters();
  refresh_eigensystem();
}

void CmaEs::init_strategy_parameters() {
  mu_ = lambda_ / 2;
  weights_.resize(static_cast<std::size_t>(mu_));
  for (int i = 0; i < mu_; ++i)
    weights_[static_cast<std::size_t>(i)] = std::log(mu_ + 0.5) - std::log(static_cast<double>(i + 1));
  const double wsum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  for (double& w : weights_) w /= wsum;
  double wsq = 0.0;
  for (double w : weights_) wsq += w * w;
  mu_eff_ = 1.0 / wsq;

  c_sigma_ = (mu_eff_ + 2.0) / (n_ + mu_eff_ + 5.0);
  d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n_ + 1.0)) - 1.0) + c_sigma_;
  c_c_ = (4.0 + mu_eff_ / n_) / (n_ + 4.0 + 2.0 * mu_eff_ / n_);
  c_1_ = 2.0 / ((n_ + 1.3) * (n_ + 1.3) + mu_eff_);
  c_mu_ = std::min(1.0 - c_1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) / ((n_ + 2.0) * (n_ + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(static_cast<double>(n_)) * (1.0 - 1.0 / (4.0 * n_) + 1.0 / (21.0 * n_ * n_));
}

void CmaEs::refresh_eigensystem() {
  MapMat cov(cov_.data(), n_, n_);
  const RowMatrix sym = 0.5 * (cov + cov.transpose());
  cov = sym;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("cmaes: eigendecomposition failed");
  Eigen::VectorXd values = solver.eigenvalues();
  const double max_ev = values.maxCoeff();
  if (!std::isfinite(max_ev)) throw std::runtime_error("cmaes: non-finite covariance eigenvalues");
  const double floor_ev = std::max(max_ev * 1e-14, 1e-30);
  bool repaired = false;
  for (int i = 0; i < n_; ++i)
    if (values[i] < floor_ev) {
      values[i] = floor_ev;
      repaired = true;
    }
  if (repaired) {
    ++eigen_repairs_;
    cov = solver.eigenvectors() * values.asDiagonal() * solver.eigenvectors().transpose();
  }
  min_eigenvalue_ = values.minCoeff();

  eigvec_.resize(static_cast<std::size_t>(n_) * n_);
  MapMat(eigvec_.data(), n_, n_) = solver.eigenvectors();
  eig_sqrt_.resize(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) eig_sqrt_[static_cast<std::size_t>(i)] = std::sqrt(values[i]);
}

std::vector<std::vector<double>> CmaEs::ask(Rng& rng) const {
  MapConstMat b(eigvec_.data(), n_, n_);
  MapConstVec mean(mean_.data(), n_);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(lambda_));
  Eigen::VectorXd z(n_);
  for (int i = 0; i < lambda_; ++i) {
    for (int j = 0; j < n_; ++j) z[j] = rng.normal() * eig_sqrt_[static_cast<std::size_t>(j)];
    const Eigen::VectorXd x = mean + sigma_ * (b * z);
    if (!x.allFinite()) throw std::runtime_error("cmaes: non-finite candidate sampled; state is corrupt");
    out[static_cast<std::size_t>(i)].assign(x.data(), x.data() + n_);
  }
  return out;
}

void CmaEs::tell(const std::vector<std::vector<double>>& candidates, std::span<const double> fitness) {
  if (candidates.size() != static_cast<std::size_t>(lambda_) || fitness.size() != candidates.size())
    throw std::invalid_argument("cmaes: tell expects population_size candidates and fitnesses");
  for (std::size_t i = 0; i < fitness.size(); ++i)
    if (!std::isfinite(fitness[i]))
      throw std::invalid_argument("cmaes: non-finite fitness for candidate " + std::to_string(i));

  std::vector<int> order(static_cast<std::size_t>(lambda_));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return fitness[static_cast<std::size_t>(a)] > fitness[static_cast<std::size_t>(b)];
  });

  MapVec mean(mean_.data(), n_);
  MapVec p_sigma(path_sigma_.data(), n_);
  MapVec p_cov(path_cov_.data(), n_);
  MapMat cov(cov_.data(), n_, n_);
  MapConstMat b(eigvec_.data(), n_, n_);

  const Eigen::VectorXd old_mean = mean;
  Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(n_);
  for (int i = 0; i < mu_; ++i) {
    MapConstVec x(candidates[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].data(), n_);
    new_mean += weights_[static_cast<std::size_t>(i)] * x;
  }
  mean = new_mean;

  const Eigen::VectorXd y_w = (new_mean - old_mean) / sigma_;

  // C^(-1/2) y = B D^(-1) B^T y
  Eigen::VectorXd tmp = b.transpose() * y_w;
  for (int i = 0; i < n_; ++i) tmp[i] /= eig_sqrt_[static_cast<std::size_t>(i)];
  const Eigen::VectorXd c_inv_sqrt_y = b * tmp;

  p_sigma = (1.0 - c_sigma_) * p_sigma + std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * c_inv_sqrt_y;

  const double ps_norm = p_sigma.norm();
  const double expected_decay = std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * (generation_ + 1)));
  const bool h_sigma = ps_norm / expected_decay / chi_n_ < 1.4 + 2.0 / (n_ + 1.0);

  p_cov = (1.0 - c_c_) * p_cov;
  if (h_sigma) p_cov += std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) * y_w;

  const double delta_h = (1.0 - (h_sigma ? 1.0 : 0.0)) * c_c_ * (2.0 - c_c_);
  RowMatrix rank_mu = RowMatrix::Zero(n_, n_);
  for (int i = 0; i < mu_; ++i) {
    MapConstVec x(candidates[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].data(), n_);
    const Eigen::VectorXd y = (x - old_mean) / sigma_;
    rank_mu += weights_[static_cast<std::size_t>(i)] * (y * y.transpose());
  }
  cov = (1.0 - c_1_ - c_mu_) * cov + c_1_ * (p_cov * p_cov.transpose() + delta_h * cov) + c_mu_ * rank_mu;

  sigma_ *= std::exp(c_sigma_ / d_sigma_ * (ps_norm / chi_n_ - 1.0));
  ++generation_;

  if (!std::isfinite(sigma_) || !mean.allFinite() || !cov.allFinite())
    throw std::runtime_error("cmaes: state went non-finite at generation " + std::to_string(generation_));
  refresh_eigensystem();
}

CmaSnapshot CmaEs::snapshot() const {
  CmaSnapshot s;
  s.dimension = n_;
  s.population_size = lambda_;
  s.generation = generation_;
  s.sigma = sigma_;
  s.eigen_repairs = eigen_repairs_;
  s.mean = mean_;
  s.path_sigma = path_sigma_;
  s.path_cov = path_cov_;
  s.covariance = cov_;
  return s;
}

CmaEs CmaEs::restore(const CmaSnapshot& s) {
  if (s.dimension < 1 || s.population_size < 2 || s.mean.size() != static_cast<std::size_t>(s.dimension) ||
      s.covariance.size() != static_cast<std::size_t>(s.dimension) * s.dimension)
    throw std::invalid_argument("cmaes: malformed snapshot");
  CmaEs es;
  es.n_ = s.dimension;
  es.lambda_ = s.population_size;
  es.generation_ = s.generation;
  es.sigma_ = s.sigma;
  es.eigen_repairs_ = s.eigen_repairs;
  es.mean_ = s.mean;
  es.path_sigma_ = s.path_sigma;
  es.path_cov_ = s.path_cov;
  es.cov_ = s.covariance;
  es.init_strategy_parameters();
  es.refresh_eigensystem();
  return es;
}

}  // namespace evopipe
