#include "colorent/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>

namespace colorent {

namespace {

double sum_squares(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

void validate_sizes(int n, int n_colors) {
  if (n < 1 || n > kMaxDenseQubits)
    throw UsageError("state: n must lie in [1, " + std::to_string(kMaxDenseQubits) + "]");
  if (n_colors < 1) throw UsageError("state: n_colors must be >= 1");
}

/// Gather table for contracting over `summed_mask` while keeping `kept_mask`.
std::vector<std::uint32_t> gather_table(std::uint32_t summed_mask, std::uint32_t kept_mask) {
  const std::uint32_t summed_dim = std::uint32_t{1} << std::popcount(summed_mask);
  const std::uint32_t kept_dim = std::uint32_t{1} << std::popcount(kept_mask);
  std::vector<std::uint32_t> config(static_cast<std::size_t>(summed_dim) * kept_dim);
  for (std::uint32_t s = 0; s < summed_dim; ++s)
    for (std::uint32_t r = 0; r < kept_dim; ++r)
      config[s * kept_dim + r] = deposit_bits(s, summed_mask) | deposit_bits(r, kept_mask);
  return config;
}

/**
 * h = (N_c/2)[2 Σ X² - Σ X_{rμ,r'ν} X_{rν,r'μ}] for X = MᵀM, M[s][(r,μ)] = Φ_{config(s,r)}^μ.
 * When `grad` is non-empty, adds weight · ∂h/∂Φ into it.
 */
double contraction_energy(std::span<const double> phi, int nc, std::span<const std::uint32_t> config,
                          std::uint32_t summed_dim, std::uint32_t kept_dim, double weight,
                          std::span<double> grad) {
  const std::size_t ncz = static_cast<std::size_t>(nc);
  const std::size_t d = static_cast<std::size_t>(kept_dim) * ncz;
  std::vector<double> m(static_cast<std::size_t>(summed_dim) * d);
  for (std::uint32_t s = 0; s < summed_dim; ++s)
    for (std::uint32_t r = 0; r < kept_dim; ++r) {
      const double* src = phi.data() + static_cast<std::size_t>(config[s * kept_dim + r]) * ncz;
      std::copy(src, src + ncz, m.data() + s * d + r * ncz);
    }

  std::vector<double> x(d * d, 0.0);
  for (std::uint32_t s = 0; s < summed_dim; ++s) {
    const double* row = m.data() + s * d;
    for (std::size_t i = 0; i < d; ++i) {
      const double ri = row[i];
      if (ri == 0.0) continue;
      double* xi = x.data() + i * d;
      for (std::size_t j = i; j < d; ++j) xi[j] += ri * row[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i * d + j] = x[j * d + i];

  auto swapped = [&](std::size_t i, std::size_t j) {
    // Y_{(r,μ),(r',ν)} = X_{(r,ν),(r',μ)}
    const std::size_t r = i / ncz, mu = i % ncz, rp = j / ncz, nu = j % ncz;
    return x[(r * ncz + nu) * d + rp * ncz + mu];
  };

  double s2 = 0.0, t2 = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double xij = x[i * d + j];
      s2 += xij * xij;
      t2 += xij * swapped(i, j);
    }
  const double half_nc = 0.5 * static_cast<double>(nc);
  const double h = half_nc * (2.0 * s2 - t2);

  if (!grad.empty()) {
    std::vector<double> w(d * d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        w[i * d + j] = half_nc * (4.0 * x[i * d + j] - 2.0 * swapped(i, j));
    for (std::uint32_t s = 0; s < summed_dim; ++s) {
      const double* row = m.data() + s * d;
      for (std::size_t j = 0; j < d; ++j) {
        const double* wj = w.data() + j * d;
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) acc += wj[i] * row[i];
        const std::size_t r = j / ncz, mu = j % ncz;
        grad[static_cast<std::size_t>(config[s * kept_dim + r]) * ncz + mu] += weight * 2.0 * acc;
      }
    }
  }
  return h;
}

double contraction_energy(std::span<const double> phi, int nc, const Contraction& c,
                          std::span<double> grad = {}) {
  return contraction_energy(phi, nc, c.config, c.summed_dim, c.kept_dim, c.weight, grad);
}

void check_subset(const CouplingContext& ctx, std::uint32_t mask) {
  if ((mask >> ctx.n()) != 0 || std::popcount(mask) != ctx.n_a())
    throw UsageError("purity_bipartition: subset must contain exactly floor(n/2) of the n qubits");
}

void check_context(const CouplingContext& ctx, const ColoredState& state) {
  if (ctx.n() != state.n()) throw UsageError("state and coupling context disagree on n");
}

}  // namespace

// ============================================================================
// States
// ============================================================================

ColoredState::ColoredState(int n, int n_colors, std::vector<double> phi, double tolerance)
    : n_(n), n_colors_(n_colors), phi_(std::move(phi)) {
  validate_sizes(n, n_colors);
  if (phi_.size() != (std::size_t{1} << n) * static_cast<std::size_t>(n_colors))
    throw UsageError("ColoredState: expected N * N_c entries");
  for (double v : phi_)
    if (!std::isfinite(v)) throw InvalidStateError("ColoredState: non-finite entry");
  const double norm = sum_squares(phi_);
  if (std::abs(norm - 1.0) > tolerance)
    throw InvalidStateError("ColoredState: |Φ|² = " + std::to_string(norm) + " is not 1");
}

ColoredState ColoredState::normalized(int n, int n_colors, std::vector<double> phi) {
  const double norm = std::sqrt(sum_squares(phi));
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw InvalidStateError("ColoredState::normalized: zero or non-finite vector");
  for (double& v : phi) v /= norm;
  return ColoredState(n, n_colors, std::move(phi));
}

ColoredState ColoredState::single_configuration(int n, std::uint32_t k,
                                                std::span<const double> color) {
  validate_sizes(n, static_cast<int>(color.size()));
  if (k >> n) throw UsageError("single_configuration: k does not fit in n bits");
  std::vector<double> phi((std::size_t{1} << n) * color.size(), 0.0);
  std::copy(color.begin(), color.end(), phi.begin() + static_cast<std::ptrdiff_t>(k * color.size()));
  return normalized(n, static_cast<int>(color.size()), std::move(phi));
}

double ColoredState::norm_squared() const { return sum_squares(phi_); }

ComplexState::ComplexState(int n, std::vector<std::complex<double>> amplitudes, double tolerance)
    : n_(n), z_(std::move(amplitudes)) {
  validate_sizes(n, 2);
  if (z_.size() != std::size_t{1} << n) throw UsageError("ComplexState: expected 2^n amplitudes");
  double norm = 0.0;
  for (const auto& a : z_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      throw InvalidStateError("ComplexState: non-finite amplitude");
    norm += std::norm(a);
  }
  if (std::abs(norm - 1.0) > tolerance) throw InvalidStateError("ComplexState: norm is not 1");
}

ColoredState random_state(int n, int n_colors, Rng& rng) {
  validate_sizes(n, n_colors);
  std::normal_distribution<double> gauss;
  std::vector<double> phi((std::size_t{1} << n) * static_cast<std::size_t>(n_colors));
  for (double& v : phi) v = gauss(rng);
  return ColoredState::normalized(n, n_colors, std::move(phi));
}

ColoredState random_state(int n, int n_colors, std::uint64_t seed) {
  Rng rng(seed);
  return random_state(n, n_colors, rng);
}

// ============================================================================
// Energy
// ============================================================================

double purity_bipartition(const CouplingContext& ctx, const ColoredState& state,
                          std::uint32_t subset_mask) {
  check_context(ctx, state);
  check_subset(ctx, subset_mask);
  const std::uint32_t complement = (ctx.dim() - 1) & ~subset_mask;
  const std::uint32_t da = std::uint32_t{1} << std::popcount(subset_mask);
  const std::uint32_t db = std::uint32_t{1} << std::popcount(complement);
  const double over_a = contraction_energy(state.values(), state.n_colors(),
                                           gather_table(subset_mask, complement), da, db, 0.0, {});
  const double over_abar = contraction_energy(state.values(), state.n_colors(),
                                              gather_table(complement, subset_mask), db, da, 0.0, {});
  return 0.5 * (over_a + over_abar);
}

PurityReport energy(const CouplingContext& ctx, const ColoredState& state) {
  check_context(ctx, state);
  const double norm = state.norm_squared();
  if (!(std::abs(norm - 1.0) <= kEnergyNormTolerance))
    throw InvalidStateError("energy: state norm deviates from 1 by more than 1e-9");

  const auto contractions = ctx.contractions();
  std::vector<double> h(contractions.size());
  for (std::size_t c = 0; c < contractions.size(); ++c)
    h[c] = contraction_energy(state.values(), state.n_colors(), contractions[c]);

  PurityReport report;
  const auto bips = ctx.bipartitions();
  report.bipartitions.assign(bips.begin(), bips.end());
  report.per_bipartition.resize(bips.size());
  if (ctx.n() % 2 == 0) {
    // The complement of each bipartition is another entry of the list.
    std::vector<std::size_t> position(ctx.dim(), 0);
    for (std::size_t b = 0; b < bips.size(); ++b) position[bips[b].mask] = b;
    for (std::size_t b = 0; b < bips.size(); ++b)
      report.per_bipartition[b] = 0.5 * (h[b] + h[position[bips[b].complement]]);
  } else {
    for (std::size_t b = 0; b < bips.size(); ++b)
      report.per_bipartition[b] = 0.5 * (h[2 * b] + h[2 * b + 1]);
  }
  double total = 0.0;
  for (double v : report.per_bipartition) total += v;
  report.total = total / static_cast<double>(bips.size());
  report.lower_bound = static_cast<double>(state.n_colors()) / (2.0 * ctx.dim_a());
  return report;
}

double energy_bruteforce(const CouplingContext& ctx, const ColoredState& state) {
  check_context(ctx, state);
  if (ctx.n() > 6)
    throw UsageError("energy_bruteforce: n > 6 is O(N^4)-infeasible; use energy() instead");
  const std::uint32_t dim = ctx.dim();
  std::vector<double> gram(static_cast<std::size_t>(dim) * dim);
  for (std::uint32_t k = 0; k < dim; ++k)
    for (std::uint32_t l = 0; l < dim; ++l) {
      const auto a = state.row(k), b = state.row(l);
      double dot = 0.0;
      for (std::size_t mu = 0; mu < a.size(); ++mu) dot += a[mu] * b[mu];
      gram[k * dim + l] = dot;
    }
  double total = 0.0;
  for (std::uint32_t k = 0; k < dim; ++k)
    for (std::uint32_t l = 0; l < dim; ++l) {
      const double gkl = gram[k * dim + l];
      double inner = 0.0;
      for (std::uint32_t kp = 0; kp < dim; ++kp)
        for (std::uint32_t lp = 0; lp < dim; ++lp)
          inner += ctx.delta_tilde_value(k, kp, l, lp) * gram[kp * dim + lp];
      total += gkl * inner;
    }
  return 0.5 * static_cast<double>(state.n_colors()) * total;
}

double quartic_energy(const CouplingContext& ctx, int n_colors, std::span<const double> phi) {
  if (phi.size() != static_cast<std::size_t>(ctx.dim()) * static_cast<std::size_t>(n_colors))
    throw UsageError("quartic_energy: field size mismatch");
  double total = 0.0;
  for (const Contraction& c : ctx.contractions())
    total += c.weight * contraction_energy(phi, n_colors, c);
  return total;
}

double quartic_energy_and_gradient(const CouplingContext& ctx, int n_colors,
                                   std::span<const double> phi, std::span<double> grad) {
  if (phi.size() != static_cast<std::size_t>(ctx.dim()) * static_cast<std::size_t>(n_colors) ||
      grad.size() != phi.size())
    throw UsageError("quartic_energy_and_gradient: field size mismatch");
  std::fill(grad.begin(), grad.end(), 0.0);
  double total = 0.0;
  for (const Contraction& c : ctx.contractions())
    total += c.weight * contraction_energy(phi, n_colors, c, grad);
  return total;
}

std::vector<double> gradient(const CouplingContext& ctx, const ColoredState& state) {
  check_context(ctx, state);
  std::vector<double> grad(state.size());
  quartic_energy_and_gradient(ctx, state.n_colors(), state.values(), grad);
  return grad;
}

std::vector<double> project_tangent(std::span<const double> phi, std::span<const double> grad) {
  if (phi.size() != grad.size()) throw UsageError("project_tangent: size mismatch");
  double dot = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    dot += grad[i] * phi[i];
    norm += phi[i] * phi[i];
  }
  const double coef = norm > 0.0 ? dot / norm : 0.0;
  std::vector<double> out(grad.begin(), grad.end());
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] -= coef * phi[i];
  return out;
}

// ============================================================================
// Complex states
// ============================================================================

ColoredState complex_to_colored(const ComplexState& z) {
  const auto amps = z.amplitudes();
  std::vector<double> phi(2 * amps.size());
  for (std::size_t k = 0; k < amps.size(); ++k) {
    phi[2 * k] = amps[k].real();
    phi[2 * k + 1] = amps[k].imag();
  }
  return ColoredState(z.n(), 2, std::move(phi), kEnergyNormTolerance);
}

double purity_complex(const ComplexState& z, std::uint32_t subset_mask) {
  const int n = z.n();
  if (subset_mask >> n) throw UsageError("purity_complex: subset outside the n qubits");
  const std::uint32_t complement = ((std::uint32_t{1} << n) - 1) & ~subset_mask;
  const std::uint32_t da = std::uint32_t{1} << std::popcount(subset_mask);
  const std::uint32_t db = std::uint32_t{1} << std::popcount(complement);
  const auto amps = z.amplitudes();

  // M[a][b] = z_k with k_A = a, k_Abar = b; ρ_A = M M†.
  std::vector<std::complex<double>> m(static_cast<std::size_t>(da) * db);
  for (std::uint32_t a = 0; a < da; ++a)
    for (std::uint32_t b = 0; b < db; ++b)
      m[a * db + b] = amps[deposit_bits(a, subset_mask) | deposit_bits(b, complement)];
  std::vector<std::complex<double>> rho(static_cast<std::size_t>(da) * da);
  for (std::uint32_t a = 0; a < da; ++a)
    for (std::uint32_t ap = 0; ap < da; ++ap) {
      std::complex<double> acc = 0.0;
      for (std::uint32_t b = 0; b < db; ++b) acc += m[a * db + b] * std::conj(m[ap * db + b]);
      rho[a * da + ap] = acc;
    }
  double trace = 0.0;
  for (std::uint32_t a = 0; a < da; ++a)
    for (std::uint32_t ap = 0; ap < da; ++ap)
      trace += (rho[a * da + ap] * rho[ap * da + a]).real();
  return trace;
}

}  // namespace colorent
