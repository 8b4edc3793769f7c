#include "drivestyle/regression.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <Eigen/Dense>

#include "drivestyle/errors.hpp"

namespace drivestyle {
namespace {

constexpr const char* kModule = "regression";

// Relative singular-value floor below which M counts as rank deficient.
constexpr double kRankTolerance = 1e-12;

Eigen::Matrix3d normal_matrix(std::span<const double> times) {
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  for (const double t : times) {
    const Eigen::Vector3d row(1.0, t, t * t);
    g.noalias() += row * row.transpose();
  }
  return g;
}

double condition_of(const Eigen::Matrix3d& g) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(g, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();  // ascending
  const double lo = std::abs(ev(0));
  const double hi = std::abs(ev(2));
  if (lo <= hi * std::numeric_limits<double>::epsilon()) {
    return std::numeric_limits<double>::infinity();
  }
  return hi / lo;
}

void check_inputs(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) {
    throw ContractViolation(kModule, "times and values differ in length");
  }
  if (times.size() < kPolynomialDegree + 1) {
    throw InsufficientDataError(kModule, "need at least 3 samples, got " +
                                             std::to_string(times.size()));
  }
}

std::vector<double> centered(std::span<const double> times, double& mean) {
  mean = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) out[i] = times[i] - mean;
  return out;
}

CentralityPolynomial solve_centered(std::span<const double> ctimes,
                                    std::span<const double> values, double mean,
                                    double alpha) {
  const auto rows = static_cast<Eigen::Index>(ctimes.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows + 3, 3);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows + 3);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double t = ctimes[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = t;
    a(i, 2) = t * t;
    rhs(i) = values[static_cast<std::size_t>(i)];
  }
  for (Eigen::Index k = 0; k < 3; ++k) a(rows + k, k) = alpha;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < 3) {
    throw ConditioningError(kModule,
                            "Vandermonde system is rank deficient; use a regularized alpha");
  }
  const Eigen::Vector3d gamma = qr.solve(rhs);

  CentralityPolynomial p;
  // gamma0 + gamma1 (t - m) + gamma2 (t - m)^2 expanded in powers of t.
  p.beta[0] = gamma(0) - gamma(1) * mean + gamma(2) * mean * mean;
  p.beta[1] = gamma(1) - 2.0 * gamma(2) * mean;
  p.beta[2] = gamma(2);
  p.alpha = alpha;
  Eigen::Matrix3d g = normal_matrix(ctimes);
  g.diagonal().array() += alpha * alpha;
  p.condition_number = condition_of(g);
  for (const double b : p.beta) {
    if (!std::isfinite(b)) throw ConditioningError(kModule, "non-finite coefficients");
  }
  return p;
}

}  // namespace

CentralityPolynomial derivative(const CentralityPolynomial& poly, int order) {
  CentralityPolynomial d = poly;
  if (order == 1) {
    d.beta = {poly.beta[1], 2.0 * poly.beta[2], 0.0};
  } else if (order == 2) {
    d.beta = {2.0 * poly.beta[2], 0.0, 0.0};
  } else {
    throw ContractViolation(kModule, "derivative order must be 1 or 2");
  }
  return d;
}

double normal_condition_number(std::span<const double> times, double alpha) {
  Eigen::Matrix3d g = normal_matrix(times);
  g.diagonal().array() += alpha * alpha;
  return condition_of(g);
}

std::span<const double> alpha_grid() {
  static constexpr std::array<double, 8> kGrid{0.0,  1e-6, 1e-5, 1e-4,
                                               1e-3, 1e-2, 1e-1, 1.0};
  return kGrid;
}

double AlphaSelector::select(std::span<const double> times) {
  if (policy_.mode == AlphaPolicy::Mode::kFixed) return policy_.fixed_alpha;

  std::optional<std::tuple<std::size_t, double, double>> key;
  if (times.size() >= 2) {
    const double step = times[1] - times[0];
    bool uniform = true;
    for (std::size_t i = 2; i < times.size() && uniform; ++i) {
      uniform = std::abs((times[i] - times[i - 1]) - step) <= 1e-9 * std::abs(step);
    }
    if (uniform) key = std::make_tuple(times.size(), times[0], step);
  }
  if (key) {
    std::lock_guard lock(mutex_);
    if (const auto it = cache_.find(*key); it != cache_.end()) return it->second;
  }

  const auto grid = alpha_grid();
  double chosen = grid.back();
  for (const double alpha : grid) {
    if (normal_condition_number(times, alpha) <= policy_.kappa_cap) {
      chosen = alpha;
      break;
    }
  }
  if (key) {
    std::lock_guard lock(mutex_);
    cache_.emplace(*key, chosen);
  }
  return chosen;
}

CentralityPolynomial fit_with_alpha(std::span<const double> times,
                                    std::span<const double> values, double alpha) {
  check_inputs(times, values);
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ContractViolation(kModule, "alpha must be finite and non-negative");
  }
  double mean = 0.0;
  const auto ctimes = centered(times, mean);
  auto p = solve_centered(ctimes, values, mean, alpha);
  p.t_start = *std::min_element(times.begin(), times.end());
  p.t_end = *std::max_element(times.begin(), times.end());
  return p;
}

CentralityPolynomial fit(std::span<const double> times, std::span<const double> values,
                         AlphaSelector& selector) {
  check_inputs(times, values);
  double mean = 0.0;
  const auto ctimes = centered(times, mean);
  const double alpha = selector.select(ctimes);
  auto p = solve_centered(ctimes, values, mean, alpha);
  p.t_start = *std::min_element(times.begin(), times.end());
  p.t_end = *std::max_element(times.begin(), times.end());
  return p;
}

std::vector<double> sample_times(const CentralitySeries& series, double frame_rate_hz) {
  std::vector<double> t;
  t.reserve(series.values.size());
  for (const auto& s : series.values) t.push_back(static_cast<double>(s.frame) / frame_rate_hz);
  return t;
}

std::vector<double> sample_values(const CentralitySeries& series) {
  std::vector<double> v;
  v.reserve(series.values.size());
  for (const auto& s : series.values) v.push_back(s.value);
  return v;
}

CentralityPolynomial fit(const CentralitySeries& series, double frame_rate_hz,
                         AlphaSelector& selector) {
  const auto t = sample_times(series, frame_rate_hz);
  const auto v = sample_values(series);
  return fit(t, v, selector);
}

ConditionDiagnostics condition_diagnostics(std::size_t sample_count, double alpha) {
  if (sample_count < kPolynomialDegree + 1) {
    throw ContractViolation(kModule, "condition diagnostics need T >= 3");
  }
  std::vector<double> t(sample_count);
  std::iota(t.begin(), t.end(), 0.0);
  return {normal_condition_number(t, 0.0), normal_condition_number(t, alpha)};
}

}  // namespace drivestyle
