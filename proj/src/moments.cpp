#include "colorent/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "colorent/field.hpp"
#include "colorent/parallel.hpp"

namespace colorent {

Rational sphere_moment(const MomentSpec& spec) {
  if (spec.dimension < 1) throw UsageError("sphere_moment: dimension must be >= 1");
  int total = 0;
  BigInt numerator = 1;
  for (const auto& [j, m] : spec.exponents) {
    if (j >= spec.dimension) throw UsageError("sphere_moment: index outside [0, N)");
    if (m < 0) throw UsageError("sphere_moment: exponents must be nonnegative");
    total += m;
    if (total > 64) throw UsageError("sphere_moment: Σ m_j exceeds 64");
    for (int i = 2; i <= m; ++i) numerator *= i;
  }
  return Rational(numerator) * wick_weight(spec.dimension, total);
}

Rational wick_weight(std::uint64_t dimension, int total) {
  if (dimension < 1 || total < 0) throw UsageError("wick_weight: invalid arguments");
  BigInt denominator = 1;
  for (int i = 0; i < total; ++i) denominator *= BigInt(dimension + static_cast<std::uint64_t>(i));
  return Rational(BigInt(1), denominator);
}

// ============================================================================
// Exact cumulants by Wick enumeration
// ============================================================================

int exact_order_max_n(int order) {
  switch (order) {
    case 1: return 10;
    case 2: return 4;
    case 3: return 3;
    default: return 0;
  }
}

namespace {

/**
 * Σ_k Π_j Δ(k_{2j}, k_{2j+1}; k_{p(2j)}, k_{p(2j+1)}) for one permutation p of
 * the 2m positions, in units of g_hat_denominator()^m. A factor is multiplied in
 * as soon as all four of its positions are assigned, pruning zero branches.
 */
std::int64_t bracket(const CouplingContext& ctx, const std::vector<int>& perm) {
  const int positions = static_cast<int>(perm.size());
  const int factors = positions / 2;
  std::vector<std::vector<int>> ready(static_cast<std::size_t>(positions));
  for (int j = 0; j < factors; ++j) {
    const int last = std::max({2 * j, 2 * j + 1, perm[static_cast<std::size_t>(2 * j)],
                               perm[static_cast<std::size_t>(2 * j + 1)]});
    ready[static_cast<std::size_t>(last)].push_back(j);
  }
  const std::uint32_t dim = ctx.dim();
  std::vector<std::uint32_t> k(static_cast<std::size_t>(positions));
  std::int64_t total = 0;

  std::function<void(int, std::int64_t)> rec = [&](int pos, std::int64_t product) {
    if (pos == positions) {
      total += product;
      return;
    }
    for (std::uint32_t v = 0; v < dim; ++v) {
      k[static_cast<std::size_t>(pos)] = v;
      std::int64_t p = product;
      for (int j : ready[static_cast<std::size_t>(pos)]) {
        p *= ctx.delta_numerator(k[static_cast<std::size_t>(2 * j)], k[static_cast<std::size_t>(2 * j + 1)],
                                 k[static_cast<std::size_t>(perm[static_cast<std::size_t>(2 * j)])],
                                 k[static_cast<std::size_t>(perm[static_cast<std::size_t>(2 * j + 1)])]);
        if (p == 0) break;
      }
      if (p != 0) rec(pos + 1, p);
    }
  };
  rec(0, 1);
  return total;
}

}  // namespace

std::vector<Rational> exact_raw_moments(const CouplingContext& ctx, int max_order) {
  if (max_order < 1 || max_order > 3) throw UsageError("exact_raw_moments: order must lie in [1, 3]");
  if (ctx.n() > exact_order_max_n(max_order))
    throw UsageError("exact cumulants of order " + std::to_string(max_order) + " are limited to n <= " +
                     std::to_string(exact_order_max_n(max_order)));
  std::vector<Rational> moments;
  for (int m = 1; m <= max_order; ++m) {
    std::vector<int> perm(static_cast<std::size_t>(2 * m));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> perms;
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));

    std::vector<std::int64_t> partial(perms.size());
    parallel_for(perms.size(), [&](std::size_t i) { partial[i] = bracket(ctx, perms[i]); });
    BigInt total = 0;
    for (std::int64_t v : partial) total += v;

    BigInt scale = 1;
    for (int j = 0; j < m; ++j) scale *= ctx.g_hat_denominator();
    moments.push_back(wick_weight(ctx.dim(), 2 * m) * Rational(total, scale));
  }
  return moments;
}

std::vector<CumulantReport> exact_cumulants(int n, int max_order) {
  const CouplingContext ctx(n);
  const auto mu = exact_raw_moments(ctx, max_order);
  std::vector<Rational> kappa;
  kappa.push_back(mu[0]);
  if (max_order >= 2) kappa.push_back(mu[1] - mu[0] * mu[0]);
  if (max_order >= 3) kappa.push_back(mu[2] - 3 * mu[1] * mu[0] + 2 * mu[0] * mu[0] * mu[0]);

  std::vector<CumulantReport> out;
  for (int m = 1; m <= max_order; ++m) {
    CumulantReport r;
    r.order = m;
    r.exact = kappa[static_cast<std::size_t>(m - 1)];
    r.cactus = cactus_cumulant(n, m);
    r.dim = ctx.dim();
    r.dim_a = ctx.dim_a();
    r.dim_abar = ctx.dim_abar();
    out.push_back(std::move(r));
  }
  return out;
}

Rational cactus_cumulant_exact(int n, int order) {
  if (n < 2 || n > kMaxQubits) throw UsageError("cactus_cumulant: n must lie in [2, 24]");
  const std::int64_t dim = std::int64_t{1} << n;
  const std::int64_t sides = (std::int64_t{1} << (n / 2)) + (std::int64_t{1} << (n - n / 2));
  auto rising = [&](int terms) {
    BigInt p = 1;
    for (int i = 1; i <= terms; ++i) p *= BigInt(dim + i);
    return p;
  };
  switch (order) {
    case 1: return Rational(BigInt(sides), rising(1));
    case 2: return Rational(BigInt(4) * sides * sides, rising(3));
    case 3: return Rational(BigInt(40) * sides * sides * sides, rising(5));
    default: throw UsageError("cactus_cumulant: only orders 1, 2, 3 have a cactus formula");
  }
}

double cactus_cumulant(int n, int order) { return to_double(cactus_cumulant_exact(n, order)); }

// ============================================================================
// Monte Carlo cumulants
// ============================================================================

std::vector<double> sample_energies(int n, int n_colors, std::size_t samples, std::uint64_t seed) {
  const CouplingContext ctx(n);
  ctx.contractions();
  constexpr std::size_t kChunks = 64;
  const std::size_t chunks = std::min(kChunks, std::max<std::size_t>(samples, 1));
  std::vector<double> energies(samples);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    const std::size_t lo = c * samples / chunks, hi = (c + 1) * samples / chunks;
    for (std::size_t i = lo; i < hi; ++i) {
      const ColoredState state = random_state(n, n_colors, rng);
      energies[i] = quartic_energy(ctx, n_colors, state.values());
    }
  });
  return energies;
}

std::vector<CumulantReport> mc_cumulants(int n, int n_colors, int order, std::size_t samples,
                                         std::uint64_t seed) {
  if (order < 1 || order > 5) throw UsageError("mc_cumulants: order must lie in [1, 5]");
  if (samples < 10 * static_cast<std::size_t>(order))
    throw UsageError("mc_cumulants: need at least 10 samples per order");
  const auto energies = sample_energies(n, n_colors, samples, seed);
  const auto estimates = k_statistics_jackknife(energies, order, std::min<std::size_t>(100, samples / 10));

  std::vector<CumulantReport> out;
  for (int m = 1; m <= order; ++m) {
    CumulantReport r;
    r.order = m;
    if (m <= 3) r.cactus = cactus_cumulant(n, m);
    r.mc = estimates[static_cast<std::size_t>(m - 1)];
    r.dim = std::uint64_t{1} << n;
    r.dim_a = std::uint64_t{1} << (n / 2);
    r.dim_abar = std::uint64_t{1} << (n - n / 2);
    out.push_back(std::move(r));
  }
  return out;
}

// ============================================================================
// Scaling fits
// ============================================================================

ScalingFit fit_scaling(std::span<const ScalingPoint> points) {
  if (points.size() < 3) throw UsageError("fit_scaling: need at least 3 points");
  bool weighted = true;
  for (const auto& p : points) {
    if (!(p.value > 0.0) || !(p.dim > 0.0)) throw UsageError("fit_scaling: values and N must be positive");
    if (!(p.stderr_ > 0.0)) weighted = false;
  }
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> xs, ys, ws;
  for (const auto& p : points) {
    const double x = std::log(p.dim), y = std::log(p.value);
    const double w = weighted ? (p.value / p.stderr_) * (p.value / p.stderr_) : 1.0;
    xs.push_back(x);
    ys.push_back(y);
    ws.push_back(w);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double det = sw * sxx - sx * sx;
  if (!(std::abs(det) > 0.0)) throw UsageError("fit_scaling: points need at least two distinct N");
  const double slope = (sw * sxy - sx * sy) / det;
  const double intercept = (sxx * sy - sx * sxy) / det;

  ScalingFit fit;
  fit.amplitude = std::exp(intercept);
  fit.exponent = -slope;
  fit.points.assign(points.begin(), points.end());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    fit.residuals.push_back(r);
    fit.chi2 += ws[i] * r * r;
  }
  // Covariance of (intercept, slope); unit weights are rescaled by the residual variance.
  const double scale = weighted ? 1.0 : fit.chi2 / static_cast<double>(points.size() - 2);
  const double var_intercept = scale * sxx / det;
  const double var_slope = scale * sw / det;
  const double cov = -scale * sx / det;
  // Exponent is minus the slope.
  fit.covariance = {var_intercept, -cov, -cov, var_slope};
  return fit;
}

ReferenceConstants reference_constants() {
  return {std::log2(3.0), 1.8417, 1.05385, 67.4, 4.158, 43.0, 4.18, 0.06};
}

}  // namespace colorent
