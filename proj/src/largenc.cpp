#include "colorent/largenc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "colorent/error.hpp"

namespace colorent {

namespace {

struct Sizes {
  double dim, dim_a, dim_abar;
};

Sizes sizes(int n) {
  if (n < 2 || n > kMaxQubits) throw UsageError("n must lie in [2, 24]");
  return {std::ldexp(1.0, n), std::ldexp(1.0, n / 2), std::ldexp(1.0, n - n / 2)};
}

/// Σ_k 1/(N(λ + c s_k)) - 1, decreasing in λ on λ > -c·min(s).
double constraint(double lambda, double coupling, const std::vector<double>& s) {
  const double dim = static_cast<double>(s.size());
  double total = 0.0;
  for (double sk : s) total += 1.0 / (dim * (lambda + coupling * sk));
  return total - 1.0;
}

double solve_lambda(double coupling, const std::vector<double>& s) {
  const double floor_value = -coupling * *std::min_element(s.begin(), s.end());
  // Bracket: constraint > 0 just above the pole, < 0 for large λ.
  double hi = floor_value + 1.0;
  while (constraint(hi, coupling, s) > 0.0) hi = floor_value + 2.0 * (hi - floor_value);
  double lo = std::nextafter(floor_value, std::numeric_limits<double>::infinity());
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (constraint(mid, coupling, s) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double beta0(int n) {
  const auto [dim, da, db] = sizes(n);
  return 2.0 * dim * dim / (da + db - 1.0);
}

LambdaReport lambda_of_beta(double beta_tilde) { return {1.0 - beta_tilde, beta_tilde >= 1.0}; }

double energy_prediction(int n, int n_colors) {
  const auto [dim, da, db] = sizes(n);
  return static_cast<double>(n_colors) * (da + db - 1.0) / (2.0 * dim);
}

double lower_bound(int n, int n_colors) {
  const auto s = sizes(n);
  return static_cast<double>(n_colors) / (2.0 * s.dim_a);
}

DysonSolution dyson_solve(const CouplingContext& ctx, double beta_tilde, const DysonOptions& options) {
  if (beta_tilde >= 1.0)
    throw CriticalityError("dyson_solve: symmetric branch unstable for beta_tilde >= 1 (lambda = " +
                           std::to_string(1.0 - beta_tilde) + ")");
  if (beta_tilde < 0.0) throw UsageError("dyson_solve: beta_tilde must be >= 0");
  if (!(options.damping > 0.0 && options.damping <= 1.0))
    throw UsageError("dyson_solve: damping must lie in (0, 1]");

  const std::uint32_t dim = ctx.dim();
  const double dimd = static_cast<double>(dim);
  // The kernel Δ̃(k,l;k,l) depends only on k XOR l.
  std::vector<double> kernel(dim);
  for (std::uint32_t d = 0; d < dim; ++d) kernel[d] = ctx.delta_tilde_value(0, d, 0, d);
  const double coupling = beta_tilde * beta0(ctx.n()) / (2.0 * dimd);

  std::vector<double> g = options.initial.value_or(std::vector<double>(dim, 1.0 / dimd));
  if (g.size() != dim) throw UsageError("dyson_solve: initial propagator must hold N entries");
  {
    double total = 0.0;
    for (double v : g) total += v;
    if (!(total > 0.0)) throw UsageError("dyson_solve: initial propagator must have positive sum");
    for (double& v : g) v /= total;
  }

  std::vector<double> s(dim), next(dim);
  auto row_sums = [&](const std::vector<double>& prop) {
    for (std::uint32_t k = 0; k < dim; ++k) {
      double acc = 0.0;
      for (std::uint32_t l = 0; l < dim; ++l) acc += kernel[k ^ l] * prop[l];
      s[k] = acc;
    }
  };

  DysonSolution sol;
  sol.beta_tilde = beta_tilde;
  double residual = std::numeric_limits<double>::infinity();
  double lambda = 1.0 - beta_tilde;
  for (int it = 0; it <= options.max_iterations; ++it) {
    row_sums(g);
    // λ is fixed by Σ_k G_k = 1 for the current row sums.
    lambda = coupling == 0.0 ? 1.0 : solve_lambda(coupling, s);
    residual = 0.0;
    for (std::uint32_t k = 0; k < dim; ++k) {
      next[k] = 1.0 / (dimd * (lambda + coupling * s[k]));
      residual = std::max(residual, std::abs(g[k] - next[k]));
    }
    sol.iterations = it;
    if (residual <= options.tolerance) break;
    if (it == options.max_iterations) break;
    for (std::uint32_t k = 0; k < dim; ++k)
      g[k] = (1.0 - options.damping) * g[k] + options.damping * next[k];
  }
  if (!(residual <= options.tolerance))
    throw ConvergenceError("dyson_solve: no convergence after " + std::to_string(options.max_iterations) +
                               " iterations (residual " + std::to_string(residual) + ")",
                           residual);

  sol.lambda = lambda;
  sol.propagator = g;
  sol.residual = residual;
  const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  sol.symmetric = (*hi - *lo) <= 1e-8 * *hi;
  return sol;
}

}  // namespace colorent
