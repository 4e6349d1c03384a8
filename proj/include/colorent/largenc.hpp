#pragma once

#include <optional>
#include <span>
#include <vector>

#include "colorent/coupling.hpp"

namespace colorent {

/// 2N² / (N_A + N_Abar - 1): the inverse-temperature scale making β̃ = β/β₀ order one.
double beta0(int n);

struct LambdaReport {
  double lambda;
  bool critical;  // β̃ >= 1: quadratic term massless or negative
};

/// λ = 1 - β̃ on the permutation-symmetric branch.
LambdaReport lambda_of_beta(double beta_tilde);

struct DysonSolution {
  double beta_tilde = 0.0;
  double lambda = 0.0;
  std::vector<double> propagator;  // G_k
  double residual = 0.0;           // max_k |G_k - rhs_k|
  int iterations = 0;
  bool symmetric = false;          // all G_k equal within the tolerance
};

struct DysonOptions {
  double tolerance = 1e-13;
  int max_iterations = 10000;
  double damping = 0.5;  // weight of the new iterate
  std::optional<std::vector<double>> initial;  // defaults to G_k = 1/N
};

/**
 * Damped fixed-point iteration of the leading large-N_c Dyson equation
 * G_k = (1/N) / (λ + (β̃β₀/2N) Σ_l Δ̃(k,l;k,l) G_l), with λ re-solved at every
 * step so that Σ_k G_k = 1. Throws CriticalityError for β̃ >= 1 and
 * ConvergenceError (carrying the last residual) if the tolerance is not met.
 */
DysonSolution dyson_solve(const CouplingContext& ctx, double beta_tilde,
                          const DysonOptions& options = {});

/// N_c (N_A + N_Abar - 1) / (2N): the β̃-independent leading-order energy, also
/// the rescaling H_Nc used for Monte Carlo curves.
double energy_prediction(int n, int n_colors);

/// N_c / (2 N_A).
double lower_bound(int n, int n_colors);

}  // namespace colorent
