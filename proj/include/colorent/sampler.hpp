#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "colorent/coupling.hpp"
#include "colorent/field.hpp"
#include "colorent/rng.hpp"
#include "colorent/stats.hpp"

namespace colorent {

// ============================================================================
// Configuration and schedules
// ============================================================================

struct MCConfig {
  int n = 4;
  int n_colors = 2;
  std::uint64_t seed = 1;
  int steps_per_measurement = 1;  // sweeps between recorded energies
  double theta_max = 0.5;         // initial proposal angle
  double target_low = 0.3;        // adaptation window for the acceptance rate
  double target_high = 0.6;
  bool adapt = true;
  bool record_snapshots = false;  // keep the state at the end of every leg

  void validate() const;
};

enum class ScheduleKind { fixed, anneal_up, anneal_down, hysteresis_loop, quench };

std::string to_string(ScheduleKind kind);

/// One stretch of `mc_steps` sweeps at inverse temperature `beta`.
struct Leg {
  double beta;
  int mc_steps;
};

class Schedule {
 public:
  /// Validates mc_steps >= 1 and, for hysteresis loops, a palindromic β sequence.
  Schedule(ScheduleKind kind, std::vector<Leg> legs);

  static Schedule fixed(double beta, int mc_steps);
  /// Legs visited in the given order; kind is anneal-up or anneal-down from the
  /// direction of the first and last β.
  static Schedule anneal(std::span<const double> betas, int mc_steps);
  /// Equilibrate at `from`, then jump straight to `to`.
  static Schedule quench(double from, double to, int equilibration_steps, int mc_steps);
  /// β_max, β_max-Δ, ..., 0, 0, ..., β_max-Δ, β_max. The first leg runs
  /// `equilibration_steps`, the rest `mc_steps`.
  static Schedule hysteresis_loop(double beta_max, double delta_beta, int mc_steps,
                                  int equilibration_steps);

  ScheduleKind kind() const noexcept { return kind_; }
  std::span<const Leg> legs() const noexcept { return legs_; }

 private:
  ScheduleKind kind_;
  std::vector<Leg> legs_;
};

/// Fine-then-coarse β̃ grid: `fine_step` up to `fine_end`, then `coarse_step` up to `coarse_end`.
std::vector<double> beta_tilde_grid(double fine_step, double fine_end, double coarse_step,
                                    double coarse_end);

struct LegRecord {
  double beta = 0.0;
  double beta_tilde = 0.0;
  Estimate energy;         // blocked mean over the measurement half
  double acceptance = 0.0; // over the measurement half
  double theta_max = 0.0;  // frozen value used for measurement
  int mc_steps = 0;
};

struct ChainRecord {
  std::vector<LegRecord> legs;
  std::vector<ColoredState> snapshots;  // one per leg when requested
};

// ============================================================================
// Metropolis moves
// ============================================================================

/// A proposed Givens rotation of flat coordinates u != v by an angle in (-θ_max, θ_max).
struct Proposal {
  std::size_t u;
  std::size_t v;
  double cos_theta;
  double sin_theta;
};

Proposal draw_proposal(std::size_t coordinates, double theta_max, Rng& rng);

/// Metropolis acceptance of an energy change. Always consumes exactly one uniform.
bool metropolis_accept(double delta_energy, double beta, Rng& rng);

/**
 * One Metropolis step evaluated from scratch (ΔH from two full energy evaluations).
 * Consumes the same random numbers as MetropolisChain::step, so both routes yield
 * identical trajectories.
 */
bool metropolis_step(const CouplingContext& ctx, ColoredState& state, double beta, double theta_max,
                     Rng& rng);

/**
 * A chain that owns its state and caches the X matrix of every contraction.
 * A move touches two configurations, so each ΔH is evaluated on the affected
 * rows and columns of the cached matrices only.
 */
class MetropolisChain {
 public:
  MetropolisChain(const CouplingContext& ctx, ColoredState initial, std::uint64_t seed);

  bool step(double beta, double theta_max);
  /// N·N_c proposals; returns the accepted fraction.
  double sweep(double beta, double theta_max);

  double energy() const noexcept { return energy_; }
  const ColoredState& state() const noexcept { return state_; }
  /// Rebuild the cached matrices and energy from the current state.
  void refresh();

 private:
  double delta_energy(const Proposal& p, double d0, double d1);
  void commit();

  const CouplingContext* ctx_;
  ColoredState state_;
  Rng rng_;
  int nc_;
  std::vector<std::vector<double>> x_;  // per contraction, row-major D×D
  double energy_ = 0.0;
  std::size_t accepted_since_refresh_ = 0;

  // Scratch: per contraction, the changed entries (flat index, increment).
  std::vector<std::vector<std::pair<std::size_t, double>>> pending_;
  std::vector<double> row0_, row1_;
};

// ============================================================================
// Protocols
// ============================================================================

/// Runs the legs in order. Each leg adapts θ_max during its first half (if enabled)
/// and measures during the second half with θ_max frozen.
ChainRecord run_chain(const CouplingContext& ctx, const MCConfig& config, const Schedule& schedule,
                      std::optional<ColoredState> initial = std::nullopt);

struct HysteresisResult {
  ChainRecord cooling;  // 0 -> β_max
  ChainRecord heating;  // β_max -> 0
};

/// equilibration_steps <= 0 means 10 × steps_per_beta at β_max before heating starts.
HysteresisResult hysteresis(const CouplingContext& ctx, const MCConfig& config, double beta_max,
                            double delta_beta, int steps_per_beta, int equilibration_steps = 0);

/// Two chains at equal β that differ only in seed.
class ReplicaPair {
 public:
  ReplicaPair(const CouplingContext& ctx, int n_colors, std::uint64_t seed_a, std::uint64_t seed_b);

  MetropolisChain& first() noexcept { return a_; }
  MetropolisChain& second() noexcept { return b_; }
  /// q = Σ_k Φ_k^(1) · Φ_k^(2).
  double overlap() const;

 private:
  MetropolisChain a_;
  MetropolisChain b_;
};

struct OverlapEstimate {
  double beta = 0.0;
  double beta_tilde = 0.0;
  Estimate rescaled_q2;  // ⟨q²⟩·N·N_c: 1 for independent random configurations
  double energy_first = 0.0;
  double energy_second = 0.0;
};

struct OverlapOptions {
  int measurements = 50;
  int cadence = 10;       // sweeps between measurements
  int burn_in = -1;       // sweeps; negative means 10× the measurement window
  double theta_max = 0.5;
  bool adapt = true;
  int pairs = 1;          // independent replica pairs averaged by overlap_scan
};

OverlapEstimate overlap(const CouplingContext& ctx, ReplicaPair& pair, double beta,
                        const OverlapOptions& options = {});

/// Anneals one replica pair through `betas`, measuring the overlap at each.
std::vector<OverlapEstimate> overlap_scan(const CouplingContext& ctx, int n_colors,
                                          std::span<const double> betas, std::uint64_t seed,
                                          const OverlapOptions& options);

// ============================================================================
// Ground states
// ============================================================================

struct MinimizeOptions {
  int anneal_legs = 12;
  int anneal_steps = 20;          // sweeps per annealing leg
  double anneal_beta_tilde_max = 30.0;
  double gradient_tolerance = 1e-8;
  int max_iterations = 20000;
};

struct MinimumResult {
  double energy = 0.0;    // E0
  double rescaled = 0.0;  // 2 E0 / N_c
  ColoredState argmin;
  std::vector<double> restart_energies;
  double gradient_norm = 0.0;  // tangent gradient norm at the returned state
};

/// Tangent-projected gradient descent with Armijo backtracking, retracting onto the
/// sphere after each step. Returns the final tangent gradient norm.
double polish_on_sphere(const CouplingContext& ctx, std::vector<double>& phi, int n_colors,
                        double gradient_tolerance, int max_iterations);

MinimumResult find_minimum(const CouplingContext& ctx, int n_colors, int restarts, std::uint64_t seed,
                           const MinimizeOptions& options = {});

struct FrustrationRow {
  int n_colors;
  double energy;
  double rescaled;
};

std::vector<FrustrationRow> frustration_scan(const CouplingContext& ctx, std::span<const int> n_colors,
                                             int restarts, std::uint64_t seed,
                                             const MinimizeOptions& options = {});

}  // namespace colorent
