#include "matfdp/trimreg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "matfdp/errors.hpp"
#include "matfdp/kernels.hpp"
#include "matfdp/parallel.hpp"

namespace matfdp {
namespace {

std::vector<double> residuals(const LoadingRows& design, std::span<const Index> rows,
                              std::span<const double> z, const Vector& w) {
  const Index k = design.width();
  std::vector<double> r(rows.size());
  const auto n = static_cast<long long>(rows.size());
#pragma omp parallel num_threads(thread_count())
  {
    Vector b(k);
#pragma omp for schedule(static)
    for (long long t = 0; t < n; ++t) {
      const auto s = static_cast<std::size_t>(t);
      design.row(rows[s], std::span<double>(b.data(), static_cast<std::size_t>(k)));
      r[s] = z[s] - b.dot(w);
    }
  }
  return r;
}

bool well_conditioned(const Matrix& gram) {
  if (gram.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  const double bottom = es.eigenvalues().minCoeff();
  return top > 0.0 && bottom > 1e-12 * top;
}

Vector pseudo_solve(const Matrix& lhs, const Vector& rhs) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(lhs);
  const Vector& vals = es.eigenvalues();
  const double cut = 1e-12 * std::max(vals.cwiseAbs().maxCoeff(), 1e-300);
  Vector proj = es.eigenvectors().transpose() * rhs;
  for (Index k = 0; k < proj.size(); ++k) proj(k) = std::fabs(vals(k)) > cut ? proj(k) / vals(k) : 0.0;
  return es.eigenvectors() * proj;
}

Vector solve_spd(const Matrix& lhs, const Vector& rhs) {
  Eigen::LDLT<Matrix> ldlt(lhs);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Vector x = ldlt.solve(rhs);
    if (x.allFinite()) return x;
  }
  return pseudo_solve(lhs, rhs);
}

std::vector<Index> all_rows(Index n) {
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  return rows;
}

}  // namespace

std::vector<Index> smallest_magnitude_indices(std::span<const double> z, std::size_t keep) {
  std::vector<Index> order(z.size());
  std::iota(order.begin(), order.end(), Index{0});
  keep = std::min(keep, z.size());
  auto by_magnitude = [&](Index a, Index b) {
    const double fa = std::fabs(z[static_cast<std::size_t>(a)]);
    const double fb = std::fabs(z[static_cast<std::size_t>(b)]);
    return fa < fb || (fa == fb && a < b);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), by_magnitude);
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

double smoothed_l1_objective(const LoadingRows& design, std::span<const Index> rows,
                             std::span<const double> z, const Vector& w, double eps) {
  const std::vector<double> r = residuals(design, rows, z, w);
  const double s = blocked_sum(r.size(), [&](std::size_t i) { return std::sqrt(r[i] * r[i] + eps * eps); });
  return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

Vector least_squares_fit(const LoadingRows& design, std::span<const double> z) {
  const Index k = design.width();
  if (k == 0) return Vector();
  const std::vector<Index> rows = all_rows(design.count());
  const std::vector<double> ones(rows.size(), 1.0);
  const auto ne = kernels::omp::normal_equations(design, rows, ones, z);
  return well_conditioned(ne.lhs) ? solve_spd(ne.lhs, ne.rhs) : pseudo_solve(ne.lhs, ne.rhs);
}

TrimmedFit trimmed_l1_fit(std::span<const double> z, const LoadingRows& design, TrimSpec spec) {
  if (!(spec.trim_fraction > 0.0 && spec.trim_fraction <= 1.0)) {
    throw InvalidFactorCount("trim fraction must lie in (0, 1]");
  }
  if (static_cast<Index>(z.size()) != design.count()) {
    throw InvalidMatrix("trimmed_l1_fit: statistic count does not match the design");
  }
  const Index k = design.width();
  TrimmedFit fit;
  fit.kept = static_cast<std::size_t>(std::floor(spec.trim_fraction * static_cast<double>(z.size())));
  if (k == 0) {
    fit.converged = true;
    return fit;
  }
  if (fit.kept < static_cast<std::size_t>(k) + 1) {
    throw InvalidFactorCount("trimmed_l1_fit: keeping " + std::to_string(fit.kept) + " statistics for " +
                             std::to_string(k) + " factors");
  }

  const std::vector<Index> rows = smallest_magnitude_indices(z, fit.kept);
  std::vector<double> zk(rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) zk[s] = z[static_cast<std::size_t>(rows[s])];

  std::vector<double> weights(rows.size(), 1.0);
  auto ne = kernels::omp::normal_equations(design, rows, weights, zk);
  if (!well_conditioned(ne.lhs)) {
    fit.w = least_squares_fit(design, z);
    fit.fell_back = true;
    fit.converged = true;
    return fit;
  }

  Vector w = solve_spd(ne.lhs, ne.rhs);
  double obj = smoothed_l1_objective(design, rows, zk, w);
  fit.objective_trace.push_back(obj);
  constexpr double eps2 = kIrlsSmoothing * kIrlsSmoothing;

  // Halves a step until the smoothed objective does not increase.
  auto damp = [&](Vector step, Vector& candidate, double& cand_obj) {
    candidate = w + step;
    cand_obj = smoothed_l1_objective(design, rows, zk, candidate);
    for (int halvings = 0; cand_obj > obj && halvings < 40; ++halvings) {
      step *= 0.5;
      candidate = w + step;
      cand_obj = smoothed_l1_objective(design, rows, zk, candidate);
    }
    return step;
  };

  std::vector<double> hess_w(rows.size()), hess_r(rows.size());
  for (int it = 0; it < kIrlsMaxIter; ++it) {
    const std::vector<double> r = residuals(design, rows, zk, w);
    for (std::size_t s = 0; s < r.size(); ++s) {
      const double root = std::sqrt(r[s] * r[s] + eps2);
      weights[s] = 1.0 / root;
      // Newton system of the same objective: H = sum eps^2 / root^3 b b^T and
      // -gradient = sum (r / root) b.
      hess_w[s] = eps2 / (root * root * root);
      hess_r[s] = r[s] * root * root / eps2;
    }
    ne = kernels::omp::normal_equations(design, rows, weights, zk);
    Vector irls_cand, newton_cand;
    double irls_obj = 0.0, newton_obj = 0.0;
    const Vector irls_step = damp(solve_spd(ne.lhs, ne.rhs) - w, irls_cand, irls_obj);
    const auto hess = kernels::omp::normal_equations(design, rows, hess_w, hess_r);
    const Vector newton_step = damp(solve_spd(hess.lhs, hess.rhs), newton_cand, newton_obj);

    const bool use_newton = newton_obj < irls_obj;
    const double cand_obj = use_newton ? newton_obj : irls_obj;
    const Vector& step = use_newton ? newton_step : irls_step;
    fit.iterations = it + 1;
    if (cand_obj > obj) {
      // No descent direction left at this precision.
      fit.converged = true;
      break;
    }
    w = use_newton ? std::move(newton_cand) : std::move(irls_cand);
    obj = cand_obj;
    fit.objective_trace.push_back(obj);
    if (step.lpNorm<Eigen::Infinity>() < kIrlsStepTol) {
      fit.converged = true;
      break;
    }
  }
  fit.w = std::move(w);
  return fit;
}

}  // namespace matfdp
