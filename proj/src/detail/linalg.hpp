#pragma once

// Internal dense linear-algebra helpers backed by Eigen.

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mcsched::detail {

// In-place Gaussian elimination with partial pivoting for the small systems
// the per-content solves produce; avoids Eigen's setup overhead there.
inline std::vector<double> solve_dense_small(std::vector<double>& a, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0) throw std::runtime_error("singular evaluation system");
    if (pivot != col) {
      for (std::size_t c = col; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
      std::swap(b[pivot], b[col]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] * inv;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
    x[r] = acc / a[r * n + r];
  }
  return x;
}

inline constexpr std::size_t kSmallSystemLimit = 128;

// Average-cost evaluation of a fixed Markov chain with per-state costs:
// solves theta + V(s) = g(s) + sum_t P(s,t) V(t) with V(ref) = 0.
// rows[s] holds (next, prob) pairs. Returns (theta, V).
template <typename Rows>
std::pair<double, std::vector<double>> solve_evaluation(const Rows& rows,
                                                        std::span<const double> costs,
                                                        std::size_t ref) {
  const std::size_t n = costs.size();
  if (n + 1 <= kSmallSystemLimit) {
    std::vector<double> a((n + 1) * (n + 1), 0.0), b(n + 1, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      a[s * (n + 1) + s] += 1.0;
      a[s * (n + 1) + n] = 1.0;  // theta column
      for (const auto& t : rows[s]) a[s * (n + 1) + t.next] -= t.prob;
      b[s] = costs[s];
    }
    a[n * (n + 1) + ref] = 1.0;
    std::vector<double> x = solve_dense_small(a, b);
    const double theta = x[n];
    x.pop_back();
    return {theta, std::move(x)};
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + 1),
                                            static_cast<Eigen::Index>(n + 1));
  Eigen::VectorXd b(static_cast<Eigen::Index>(n + 1));
  for (std::size_t s = 0; s < n; ++s) {
    a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) += 1.0;
    a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(n)) = 1.0;  // theta column
    for (const auto& t : rows[s]) {
      a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t.next)) -= t.prob;
    }
    b(static_cast<Eigen::Index>(s)) = costs[s];
  }
  a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ref)) = 1.0;
  b(static_cast<Eigen::Index>(n)) = 0.0;

  Eigen::VectorXd x = a.partialPivLu().solve(b);
  std::vector<double> values(n);
  for (std::size_t s = 0; s < n; ++s) values[s] = x(static_cast<Eigen::Index>(s));
  return {x(static_cast<Eigen::Index>(n)), std::move(values)};
}

// Stationary distribution of an irreducible-enough chain (single closed class
// assumed already validated): solves pi^T P = pi^T, sum pi = 1.
template <typename Rows>
std::vector<double> solve_stationary(const Rows& rows, std::size_t n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) -= 1.0;
    for (const auto& t : rows[s]) {
      a(static_cast<Eigen::Index>(t.next), static_cast<Eigen::Index>(s)) += t.prob;
    }
  }
  // Replace the first balance equation with the normalization constraint.
  for (std::size_t s = 0; s < n; ++s) a(0, static_cast<Eigen::Index>(s)) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  b(0) = 1.0;
  Eigen::VectorXd pi = a.partialPivLu().solve(b);
  std::vector<double> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    // Clamp tiny negative round-off on transient states.
    out[s] = pi(static_cast<Eigen::Index>(s)) < 0 && pi(static_cast<Eigen::Index>(s)) > -1e-12
                 ? 0.0
                 : pi(static_cast<Eigen::Index>(s));
  }
  return out;
}

}  // namespace mcsched::detail
