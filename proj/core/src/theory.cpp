#include "eslab/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace eslab::theory {
namespace {

double as_real(std::size_t n) { return static_cast<double>(n); }

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void require_nonnegative(double x, const char* what) {
  if (!(x >= 0.0)) throw std::invalid_argument(std::string(what) + " must be >= 0");
}

}  // namespace

double flat_drift(double alpha, std::size_t steps, std::size_t dimension, std::size_t population) {
  return alpha * alpha * as_real(steps) * as_real(dimension) / as_real(population);
}

double flat_drift_slope(double alpha, std::size_t dimension, std::size_t population) {
  return alpha * alpha * as_real(dimension) / as_real(population);
}

double step_variance(double alpha, std::size_t population) {
  return alpha * alpha / as_real(population);
}

double sigma_r_linear(double sigma, double v_norm, double sigma_xi) {
  return sigma_r_quadratic(sigma, v_norm, 0.0, sigma_xi);
}

double signal_fraction(double sigma, double v_norm, double sigma_xi) {
  const double signal = sigma * sigma * v_norm * v_norm;
  const double total = signal + sigma_xi * sigma_xi;
  if (!(total > 0.0)) throw std::invalid_argument("degenerate reward distribution");
  return signal / total;
}

double rho_linear(double s, std::size_t population, std::size_t dimension) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("signal fraction must lie in [0, 1]");
  if (population < 2) throw std::invalid_argument("population must be at least 2");
  if (dimension < 1) throw std::invalid_argument("dimension must be positive");
  const double k = (as_real(population) + 1.0) * s;
  return (1.0 + k) / (as_real(dimension) + k);
}

double sigma_r_quadratic(double sigma, double v_norm, double trace_q2, double sigma_xi) {
  require_nonnegative(sigma, "sigma");
  require_nonnegative(v_norm, "v_norm");
  require_nonnegative(trace_q2, "trace_q2");
  require_nonnegative(sigma_xi, "sigma_xi");
  const double s2 = sigma * sigma;
  const double var = s2 * v_norm * v_norm + 0.5 * s2 * s2 * trace_q2 + sigma_xi * sigma_xi;
  if (!(var > 0.0)) throw std::invalid_argument("degenerate reward distribution");
  return std::sqrt(var);
}

StepMoments es_step_moments(LandscapeKind kind, std::span<const double> v,
                            std::span<const double> eigenvalues, double sigma, double alpha,
                            std::size_t population, double sigma_xi) {
  if (population < 2) throw std::invalid_argument("population must be at least 2");
  StepMoments m;
  const std::size_t d = v.size();
  m.mean.assign(d, 0.0);
  m.rank1_direction.assign(v.begin(), v.end());
  m.isotropic_coeff = step_variance(alpha, population);

  double trace_q2 = 0.0;
  if (kind == LandscapeKind::quadratic) {
    check_dimension(d, eigenvalues.size());
    for (double l : eigenvalues) trace_q2 += l * l;
  }
  const double v_norm = std::sqrt(dot(v, v));
  if (kind == LandscapeKind::flat || (v_norm == 0.0 && trace_q2 == 0.0)) {
    if (sigma_xi == 0.0) {
      m.degenerate = true;
      m.isotropic_coeff = 0.0;
      return m;
    }
    m.sigma_r = sigma_xi;
    return m;
  }

  m.sigma_r = sigma_r_quadratic(sigma, v_norm, trace_q2, sigma_xi);
  const double n = as_real(population);
  const double sr2 = m.sigma_r * m.sigma_r;
  for (std::size_t i = 0; i < d; ++i) m.mean[i] = -alpha * sigma * v[i] / m.sigma_r;
  m.rank1_coeff = alpha * alpha * sigma * sigma / (n * sr2);
  if (kind == LandscapeKind::quadratic) {
    m.spectrum_coeff = 2.0 * alpha * alpha * std::pow(sigma, 4) / (n * sr2);
  }
  return m;
}

std::vector<double> dense_covariance(const StepMoments& m, std::span<const double> eigenvalues) {
  const std::size_t d = m.rank1_direction.size();
  std::vector<double> cov(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      cov[i * d + j] = m.rank1_coeff * m.rank1_direction[i] * m.rank1_direction[j];
    }
    cov[i * d + i] += m.isotropic_coeff;
    if (m.spectrum_coeff != 0.0) {
      check_dimension(d, eigenvalues.size());
      cov[i * d + i] += m.spectrum_coeff * eigenvalues[i] * eigenvalues[i];
    }
  }
  return cov;
}

double rho_quadratic(std::span<const double> v, std::span<const double> eigenvalues, double sigma,
                     std::size_t population, double sigma_xi) {
  check_dimension(v.size(), eigenvalues.size());
  const double v2 = dot(v, v);
  if (!(v2 > 0.0)) throw std::invalid_argument("gradient direction undefined");
  double trace_q2 = 0.0;
  double aligned_q2 = 0.0;  // v̂ᵀQ²v̂
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double l2 = eigenvalues[k] * eigenvalues[k];
    trace_q2 += l2;
    aligned_q2 += l2 * v[k] * v[k] / v2;
  }
  const double sr = sigma_r_quadratic(sigma, std::sqrt(v2), trace_q2, sigma_xi);
  const double s2 = sigma * sigma;
  const double n1 = as_real(population) + 1.0;
  const double common = n1 * s2 * v2;
  const double num = common + 2.0 * s2 * s2 * aligned_q2 + sr * sr;
  const double den = common + 2.0 * s2 * s2 * trace_q2 + as_real(v.size()) * sr * sr;
  return num / den;
}

double zscore_mean_attenuation(std::size_t population, ZScoreDenominator denominator) {
  if (population < 2) throw std::invalid_argument("population must be at least 2");
  const double n = as_real(population);
  // c4(N) = E[s]/σ for the unbiased sample standard deviation.
  const double c4 = std::sqrt(2.0 / (n - 1.0)) *
                    std::exp(std::lgamma(n / 2.0) - std::lgamma((n - 1.0) / 2.0));
  return denominator == ZScoreDenominator::population ? std::sqrt((n - 1.0) / n) * c4
                                                      : (n - 1.0) / n * c4;
}

double rho_linear_sample_zscore(double s, std::size_t population, std::size_t dimension) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("signal fraction must lie in [0, 1]");
  if (population < 2) throw std::invalid_argument("population must be at least 2");
  const double k = (as_real(population) - 2.0) * s;
  return (1.0 + k) / (as_real(dimension) + k);
}

double ou_projected_mean(double theta0_proj, double gamma, std::size_t t) {
  return std::pow(gamma, as_real(t)) * theta0_proj;
}

double ou_projected_variance(double alpha, std::size_t population, double gamma, std::size_t t) {
  const double base = step_variance(alpha, population);
  const double g2 = gamma * gamma;
  if (std::abs(g2 - 1.0) < kUnitRootTolerance) return base * as_real(t);
  return base * (1.0 - std::pow(g2, as_real(t))) / (1.0 - g2);
}

double ou_asymptotic_variance(double alpha, std::size_t population, double gamma) {
  if (!(std::abs(gamma) < 1.0)) throw std::domain_error("non-convergent direction");
  return step_variance(alpha, population) / (1.0 - gamma * gamma);
}

double convergence_timescale(double gamma) {
  if (!(std::abs(gamma) < 1.0)) throw std::domain_error("non-convergent direction");
  if (gamma == 0.0) return 0.0;
  return -std::log(2.0) / std::log(gamma * gamma);
}

GdProjection gd_projected(double theta0_proj, double beta, double eigenvalue, std::size_t t) {
  GdProjection p;
  p.value = std::pow(1.0 - beta * eigenvalue, as_real(t)) * theta0_proj;
  p.stable = eigenvalue > 0.0 && eigenvalue < 2.0 / beta;
  return p;
}

bool gd_divergent(double beta, double eigenvalue) {
  return eigenvalue < 0.0 || beta * eigenvalue >= 2.0;
}

DisplacementDecomposition displacement_decomposition(std::span<const double> theta0,
                                                     std::span<const double> eigenvalues,
                                                     const OuParameters& es, std::size_t steps) {
  check_dimension(eigenvalues.size(), theta0.size());
  DisplacementDecomposition out;
  std::size_t rank = 0;
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    if (eigenvalues[k] == 0.0) continue;
    ++rank;
    const double gamma = es.contraction(eigenvalues[k]);
    const double settled = 1.0 - std::pow(gamma, as_real(steps));
    out.signal_sq_norm += settled * settled * theta0[k] * theta0[k];
    out.diffusion_sq_norm += ou_projected_variance(es.alpha, es.population, gamma, steps);
  }
  out.diffusion_sq_norm += flat_drift(es.alpha, steps, eigenvalues.size() - rank, es.population);
  out.total = out.signal_sq_norm + out.diffusion_sq_norm;
  return out;
}

double es_gd_difference(double alpha, std::size_t steps, std::size_t dimension, std::size_t rank,
                        std::size_t population) {
  if (rank > dimension) throw std::invalid_argument("rank exceeds dimension");
  return flat_drift(alpha, steps, dimension - rank, population);
}

double expected_cosine_scale(std::size_t rank, std::size_t dimension) {
  if (rank < 1 || rank > dimension) throw std::invalid_argument("need 1 <= r <= d");
  return std::sqrt(as_real(rank) / as_real(dimension));
}

HierarchyPrediction hierarchy_prediction(std::span<const double> theta0,
                                         std::span<const double> eigenvalues,
                                         const OuParameters& es, double beta, std::size_t steps) {
  check_dimension(eigenvalues.size(), theta0.size());
  HierarchyPrediction h;
  std::size_t rank = 0;
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    if (eigenvalues[k] == 0.0) continue;
    ++rank;
    const double moved = theta0[k] - gd_projected(theta0[k], beta, eigenvalues[k], steps).value;
    h.gd_sq_norm += moved * moved;
  }
  h.es_sq_norm = displacement_decomposition(theta0, eigenvalues, es, steps).total;
  h.es_gd_diff_sq_norm = es_gd_difference(es.alpha, steps, eigenvalues.size(), rank, es.population);
  h.expected_cosine_scale = rank > 0 ? expected_cosine_scale(rank, eigenvalues.size()) : 0.0;
  return h;
}

double effective_dimension(double slope, std::size_t population, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  return slope * as_real(population) / (alpha * alpha);
}

}  // namespace eslab::theory
