#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "colorent/bitstring.hpp"
#include "colorent/rational.hpp"

namespace colorent {

// ============================================================================
// Balanced bipartitions
// ============================================================================

/// A subset A of the qubits with |A| = floor(n/2); `mask` has bit i set for qubit i in A.
struct Bipartition {
  std::uint32_t mask;
  std::uint32_t complement;
};

/// All floor(n/2)-subsets of {0, ..., n-1} in lexicographic order of their sorted
/// element lists. Requires 2 <= n <= 24.
std::vector<Bipartition> balanced_bipartitions(int n);

/**
 * Gather tables for contracting the field over one side of a bipartition.
 *
 * Configuration k splits into (s, r): s indexes the summed side, r the kept side.
 * The X matrix of the contraction is indexed by (r, color) pairs.
 */
struct Contraction {
  std::size_t bipartition;  // index into CouplingContext::bipartitions()
  std::uint32_t summed_mask;
  std::uint32_t kept_mask;
  std::uint32_t summed_dim;
  std::uint32_t kept_dim;
  double weight;                       // contribution to the bipartition average
  std::vector<std::uint32_t> config;   // [s * kept_dim + r] -> k
  std::vector<std::uint32_t> summed;   // k -> s
  std::vector<std::uint32_t> kept;     // k -> r
};

// ============================================================================
// Coupling context
// ============================================================================

/**
 * Exact coupling tables for n qubits and balanced bipartitions n_A = floor(n/2).
 *
 * ĝ(s,t) = binom(n-s-t, n_A-s) + binom(n-s-t, n_A-t) over 2·binom(n, n_A); every
 * value is stored as an exact rational and as an integer numerator over the common
 * denominator 2·binom(n, n_A). Δ and Δ̃ are evaluated on demand from the table.
 * Immutable after construction except for the lazily built contraction tables,
 * which are guarded by a once-flag, so concurrent reads are safe.
 */
class CouplingContext {
 public:
  explicit CouplingContext(int n);

  int n() const noexcept { return n_; }
  int n_a() const noexcept { return n_a_; }
  std::uint32_t dim() const noexcept { return std::uint32_t{1} << n_; }
  std::uint32_t dim_a() const noexcept { return std::uint32_t{1} << n_a_; }
  std::uint32_t dim_abar() const noexcept { return std::uint32_t{1} << (n_ - n_a_); }

  const Rational& g_hat(int s, int t) const;
  double g_hat_value(int s, int t) const { return ghat_value_[index(s, t)]; }
  std::int64_t g_hat_numerator(int s, int t) const { return ghat_num_[index(s, t)]; }
  /// Common denominator 2·binom(n, n_A) of every ĝ value.
  std::int64_t g_hat_denominator() const noexcept { return denominator_; }

  /// g(a, b) = [a ∧ b = 0] ĝ(|a|, |b|) as a numerator over g_hat_denominator().
  std::int64_t g_numerator(std::uint32_t a, std::uint32_t b) const {
    return (a & b) ? 0 : ghat_num_[index(std::popcount(a), std::popcount(b))];
  }
  std::int64_t delta_numerator(std::uint32_t k, std::uint32_t kp, std::uint32_t l,
                               std::uint32_t lp) const {
    return g_numerator((k ^ l) | (kp ^ lp), (k ^ lp) | (kp ^ l));
  }
  std::int64_t delta_tilde_numerator(std::uint32_t k, std::uint32_t kp, std::uint32_t l,
                                     std::uint32_t lp) const {
    return 2 * delta_numerator(k, kp, l, lp) - delta_numerator(k, l, kp, lp);
  }
  double delta_value(std::uint32_t k, std::uint32_t kp, std::uint32_t l,
                     std::uint32_t lp) const {
    const std::uint32_t a = (k ^ l) | (kp ^ lp);
    const std::uint32_t b = (k ^ lp) | (kp ^ l);
    return (a & b) ? 0.0 : ghat_value_[index(std::popcount(a), std::popcount(b))];
  }
  double delta_tilde_value(std::uint32_t k, std::uint32_t kp, std::uint32_t l,
                           std::uint32_t lp) const {
    return 2.0 * delta_value(k, kp, l, lp) - delta_value(k, l, kp, lp);
  }

  Rational delta(const BitString& k, const BitString& kp, const BitString& l,
                 const BitString& lp) const;
  Rational delta_tilde(const BitString& k, const BitString& kp, const BitString& l,
                       const BitString& lp) const;

  /// Σ_l Δ̃(k,l;k,l) evaluated by direct summation (O(N)).
  Rational delta_tilde_row_sum_at(const BitString& k) const;
  /// The k-independent value N_A + N_Abar - 1.
  std::int64_t delta_tilde_row_sum() const noexcept { return row_sum_; }

  std::span<const Bipartition> bipartitions() const noexcept { return bipartitions_; }

  /// Contractions whose weighted sum reproduces H: for even n one per bipartition
  /// (the complement is itself in the list), for odd n both sides of each.
  /// Built on first use; throws UsageError when n exceeds dense-state limits.
  std::span<const Contraction> contractions() const;

 private:
  std::size_t index(int s, int t) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(n_ + 1) + static_cast<std::size_t>(t);
  }

  int n_;
  int n_a_;
  std::int64_t denominator_;
  std::int64_t row_sum_;
  std::vector<Rational> ghat_;
  std::vector<double> ghat_value_;
  std::vector<std::int64_t> ghat_num_;
  std::vector<Bipartition> bipartitions_;

  struct Lazy {
    std::once_flag once;
    std::vector<Contraction> contractions;
  };
  std::shared_ptr<Lazy> lazy_;
};

/// Largest n for which dense states and contraction tables are built.
inline constexpr int kMaxDenseQubits = 14;

}  // namespace colorent
