#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "colorent/coupling.hpp"
#include "colorent/rng.hpp"

namespace colorent {

inline constexpr double kNormTolerance = 1e-12;      // construction invariant
inline constexpr double kEnergyNormTolerance = 1e-9;  // accepted at energy() entry

/**
 * Real field Φ_k^μ with N = 2^n configurations and N_c colors, stored k-major
 * (entry (k, μ) lives at k * N_c + μ). Holds Σ Φ² = 1 and finite entries.
 */
class ColoredState {
 public:
  /// Validates size, finiteness and |‖Φ‖² - 1| <= tolerance.
  ColoredState(int n, int n_colors, std::vector<double> phi, double tolerance = kNormTolerance);

  /// Rescales `phi` to unit norm before validating.
  static ColoredState normalized(int n, int n_colors, std::vector<double> phi);

  /// Unit vector concentrated on configuration k with color direction `color`.
  static ColoredState single_configuration(int n, std::uint32_t k, std::span<const double> color);

  int n() const noexcept { return n_; }
  int n_colors() const noexcept { return n_colors_; }
  std::uint32_t dim() const noexcept { return std::uint32_t{1} << n_; }
  std::size_t size() const noexcept { return phi_.size(); }

  double at(std::uint32_t k, int mu) const {
    return phi_[static_cast<std::size_t>(k) * static_cast<std::size_t>(n_colors_) +
                static_cast<std::size_t>(mu)];
  }
  std::span<const double> row(std::uint32_t k) const {
    return std::span<const double>(phi_).subspan(
        static_cast<std::size_t>(k) * static_cast<std::size_t>(n_colors_),
        static_cast<std::size_t>(n_colors_));
  }
  std::span<const double> values() const noexcept { return phi_; }
  double norm_squared() const;

  /// Rotate flat coordinates u, v by the angle with cosine c and sine s.
  /// An isometry: the norm changes only by rounding.
  void rotate(std::size_t u, std::size_t v, double c, double s) {
    const double x = phi_[u];
    const double y = phi_[v];
    phi_[u] = c * x - s * y;
    phi_[v] = s * x + c * y;
  }

  friend bool operator==(const ColoredState&, const ColoredState&) = default;

 private:
  int n_;
  int n_colors_;
  std::vector<double> phi_;
};

/// Pure qubit state Σ z_k |k⟩ with unit norm.
class ComplexState {
 public:
  ComplexState(int n, std::vector<std::complex<double>> amplitudes,
               double tolerance = kNormTolerance);

  int n() const noexcept { return n_; }
  std::span<const std::complex<double>> amplitudes() const noexcept { return z_; }

 private:
  int n_;
  std::vector<std::complex<double>> z_;
};

struct PurityReport {
  std::vector<Bipartition> bipartitions;
  std::vector<double> per_bipartition;  // H_A, aligned with `bipartitions`
  double total = 0.0;                   // mean of per_bipartition
  double lower_bound = 0.0;             // N_c / (2 N_A)
};

/// Uniform point on the unit sphere of dimension N·N_c; deterministic per seed.
ColoredState random_state(int n, int n_colors, std::uint64_t seed);
ColoredState random_state(int n, int n_colors, Rng& rng);

/**
 * H_A for one balanced bipartition, computed from the X matrices of both sides,
 * H_A = ½ [h(A) + h(Ā)] with h(S) = (N_c/2)[2 tr(XᵀX) - tr(XᵀY)] where X contracts
 * the field over the configurations of S and Y is X with its colors swapped.
 * For N_c = 2 this is the purity Tr ρ_A².
 */
double purity_bipartition(const CouplingContext& ctx, const ColoredState& state,
                          std::uint32_t subset_mask);

/// Bipartition-averaged energy with per-bipartition breakdown.
PurityReport energy(const CouplingContext& ctx, const ColoredState& state);

/// Direct O(N⁴) sum (N_c/2) Σ Δ̃ (Φ_k·Φ_l)(Φ_k'·Φ_l'); refuses n > 6.
double energy_bruteforce(const CouplingContext& ctx, const ColoredState& state);

/// ∂H/∂Φ of the unconstrained quartic form, same layout as the state.
std::vector<double> gradient(const CouplingContext& ctx, const ColoredState& state);

// Unchecked quartic form on any (not necessarily normalized) field.
double quartic_energy(const CouplingContext& ctx, int n_colors, std::span<const double> phi);
double quartic_energy_and_gradient(const CouplingContext& ctx, int n_colors,
                                   std::span<const double> phi, std::span<double> grad);

/// g - (g·Φ)Φ, the component of g tangent to the unit sphere at Φ.
std::vector<double> project_tangent(std::span<const double> phi, std::span<const double> grad);

ColoredState complex_to_colored(const ComplexState& z);

/// Tr ρ_A² from reshaping z into an N_A × N_Abar matrix M: tr((MM†)²).
double purity_complex(const ComplexState& z, std::uint32_t subset_mask);

}  // namespace colorent
