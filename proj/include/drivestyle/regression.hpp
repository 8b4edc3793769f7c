#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "drivestyle/centrality.hpp"
#include "drivestyle/config.hpp"

namespace drivestyle {

inline constexpr std::size_t kPolynomialDegree = 2;

// zeta(t) = b0 + b1 t + b2 t^2 on [t_start, t_end] seconds.
struct CentralityPolynomial {
  std::array<double, 3> beta{};
  double t_start = 0.0;
  double t_end = 0.0;
  double alpha = 0.0;
  double condition_number = 1.0;  // kappa of (M^T M + alpha^2 I) actually solved

  double evaluate(double t) const { return beta[0] + beta[1] * t + beta[2] * t * t; }
};

// Analytic derivative; order must be 1 or 2 (ContractViolation otherwise).
CentralityPolynomial derivative(const CentralityPolynomial& poly, int order);

// kappa = sigma_max / sigma_min of M^T M + alpha^2 I for the quadratic
// Vandermonde matrix M of `times`. Infinity when singular.
double normal_condition_number(std::span<const double> times, double alpha);

// Grid of candidate alphas, ascending: 0, 1e-6, ..., 1.
std::span<const double> alpha_grid();

// Picks alpha per AlphaPolicy. Under the condition cap the choice depends only
// on the sample layout, so uniform layouts are cached per (count, first, step).
class AlphaSelector {
 public:
  explicit AlphaSelector(AlphaPolicy policy = {}) : policy_(policy) {}

  double select(std::span<const double> times);
  const AlphaPolicy& policy() const { return policy_; }

 private:
  AlphaPolicy policy_;
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, double, double>, double> cache_;
};

// Minimizes ||zeta - M gamma||^2 + alpha^2 ||gamma||^2 over centered time
// t - mean(t), then maps gamma back to absolute-time coefficients.
// Throws InsufficientDataError for fewer than 3 samples and ConditioningError
// when alpha == 0 and M is rank deficient.
CentralityPolynomial fit(std::span<const double> times, std::span<const double> values,
                         AlphaSelector& selector);
CentralityPolynomial fit_with_alpha(std::span<const double> times,
                                    std::span<const double> values, double alpha);
CentralityPolynomial fit(const CentralitySeries& series, double frame_rate_hz,
                         AlphaSelector& selector);

struct ConditionDiagnostics {
  double kappa_raw = 0.0;
  double kappa_regularized = 0.0;
};

// kappa of M^T M for uncentered t = 0..T-1, with and without alpha^2 I.
ConditionDiagnostics condition_diagnostics(std::size_t sample_count, double alpha);

std::vector<double> sample_times(const CentralitySeries& series, double frame_rate_hz);
std::vector<double> sample_values(const CentralitySeries& series);

}  // namespace drivestyle
