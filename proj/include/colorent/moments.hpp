#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "colorent/coupling.hpp"
#include "colorent/rational.hpp"
#include "colorent/stats.hpp"

namespace colorent {

/// Exponents m_j of ⟨Π_j |z_j|^{2 m_j}⟩ on the unit sphere of C^N.
struct MomentSpec {
  std::uint64_t dimension = 0;
  std::map<std::uint64_t, int> exponents;
};

/// (N-1)! Π m_j! / (N-1+Σ m_j)!, exact. Requires Σ m_j <= 64 and keys < N.
Rational sphere_moment(const MomentSpec& spec);

/// (N-1)!/(N-1+total)!: the weight of one Wick pairing of `total` z's with `total` z̄'s.
Rational wick_weight(std::uint64_t dimension, int total);

struct CumulantReport {
  int order = 0;
  std::optional<Rational> exact;  // Wick enumeration (N_c = 2)
  std::optional<double> cactus;   // analytic cactus sum, orders 1..3
  std::optional<Estimate> mc;     // k-statistic with jackknife error
  std::uint64_t dim = 0, dim_a = 0, dim_abar = 0;
};

/// Largest n for which exact_cumulants enumerates the given order.
int exact_order_max_n(int order);

/// ⟨H^m⟩_0 for m = 1..max_order by brute-force Wick enumeration over S_{2m}.
std::vector<Rational> exact_raw_moments(const CouplingContext& ctx, int max_order);

/// Cumulants 1..max_order (<= 3) of H at β = 0 for qubits, exact.
std::vector<CumulantReport> exact_cumulants(int n, int max_order);

/// Cactus-only cumulant, exact: orders 1, 2, 3.
Rational cactus_cumulant_exact(int n, int order);
double cactus_cumulant(int n, int order);

/// Energies of `samples` uniform random states; chunked with per-chunk derived
/// seeds so the result does not depend on the worker count.
std::vector<double> sample_energies(int n, int n_colors, std::size_t samples, std::uint64_t seed);

/// k-statistics of H over uniform random states, orders 1..order (<= 5).
std::vector<CumulantReport> mc_cumulants(int n, int n_colors, int order, std::size_t samples,
                                         std::uint64_t seed);

struct ScalingPoint {
  double dim;
  double value;
  double stderr_;
};

/// value ≈ amplitude · N^(-exponent).
struct ScalingFit {
  double amplitude = 0.0;
  double exponent = 0.0;
  std::array<double, 4> covariance{};  // of (ln amplitude, exponent), row-major
  std::vector<double> residuals;       // in ln(value)
  double chi2 = 0.0;
  std::vector<ScalingPoint> points;
};

/// Weighted least squares of ln(value) against ln(N). Zero error bars fall back
/// to unit weights.
ScalingFit fit_scaling(std::span<const ScalingPoint> points);

struct ReferenceConstants {
  double alpha;               // log2 3, exponent of the leafless second-order graph
  double gamma;               // leafless third-order exponent
  double c;                   // its amplitude
  double k3_amplitude;        // asymptotic third cumulant amplitude
  double k3_exponent;         // and exponent
  double k3_fit_amplitude;    // numerical fit of the third cumulant
  double k3_fit_exponent;
  double k3_fit_exponent_error;
};

ReferenceConstants reference_constants();

}  // namespace colorent
