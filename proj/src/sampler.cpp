#include "colorent/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "colorent/error.hpp"
#include "colorent/largenc.hpp"
#include "colorent/parallel.hpp"

namespace colorent {

void MCConfig::validate() const {
  if (n < 2 || n > kMaxDenseQubits) throw UsageError("MCConfig: n must lie in [2, 14]");
  if (n_colors < 1 || n_colors > 64) throw UsageError("MCConfig: n_colors must lie in [1, 64]");
  if (steps_per_measurement < 1) throw UsageError("MCConfig: steps_per_measurement must be >= 1");
  if (!(theta_max > 0.0) || theta_max > std::numbers::pi)
    throw UsageError("MCConfig: theta_max must lie in (0, π]");
  if (!(target_low > 0.0) || !(target_low < target_high) || !(target_high < 1.0))
    throw UsageError("MCConfig: target acceptance must satisfy 0 < low < high < 1");
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::fixed: return "fixed";
    case ScheduleKind::anneal_up: return "anneal-up";
    case ScheduleKind::anneal_down: return "anneal-down";
    case ScheduleKind::hysteresis_loop: return "hysteresis-loop";
    case ScheduleKind::quench: return "quench";
  }
  return "unknown";
}

// ============================================================================
// Schedules
// ============================================================================

Schedule::Schedule(ScheduleKind kind, std::vector<Leg> legs) : kind_(kind), legs_(std::move(legs)) {
  if (legs_.empty()) throw UsageError("Schedule: no legs");
  for (const Leg& l : legs_) {
    if (l.mc_steps < 1) throw UsageError("Schedule: every leg needs mc_steps >= 1");
    if (!std::isfinite(l.beta)) throw UsageError("Schedule: β must be finite");
  }
  if (kind_ == ScheduleKind::hysteresis_loop) {
    for (std::size_t i = 0, j = legs_.size() - 1; i < j; ++i, --j)
      if (legs_[i].beta != legs_[j].beta) throw UsageError("Schedule: hysteresis loop is not palindromic in β");
  }
}

Schedule Schedule::fixed(double beta, int mc_steps) { return Schedule(ScheduleKind::fixed, {{beta, mc_steps}}); }

Schedule Schedule::anneal(std::span<const double> betas, int mc_steps) {
  if (betas.empty()) throw UsageError("Schedule::anneal: no β values");
  std::vector<Leg> legs;
  for (double b : betas) legs.push_back({b, mc_steps});
  const auto kind = betas.back() >= betas.front() ? ScheduleKind::anneal_up : ScheduleKind::anneal_down;
  return Schedule(kind, std::move(legs));
}

Schedule Schedule::quench(double from, double to, int equilibration_steps, int mc_steps) {
  return Schedule(ScheduleKind::quench, {{from, equilibration_steps}, {to, mc_steps}});
}

Schedule Schedule::hysteresis_loop(double beta_max, double delta_beta, int mc_steps,
                                   int equilibration_steps) {
  if (!(beta_max > 0.0)) throw UsageError("hysteresis: beta_max must be positive");
  if (!(delta_beta > 0.0)) throw UsageError("hysteresis: delta_beta must be positive");
  std::vector<double> down;
  for (int i = 0;; ++i) {
    const double b = beta_max - i * delta_beta;
    if (b <= 0.0) break;
    down.push_back(b);
  }
  down.push_back(0.0);
  std::vector<Leg> legs;
  for (std::size_t i = 0; i < down.size(); ++i) legs.push_back({down[i], i == 0 ? equilibration_steps : mc_steps});
  for (std::size_t i = down.size(); i-- > 0;) legs.push_back({down[i], mc_steps});
  return Schedule(ScheduleKind::hysteresis_loop, std::move(legs));
}

std::vector<double> beta_tilde_grid(double fine_step, double fine_end, double coarse_step,
                                    double coarse_end) {
  if (!(fine_step > 0.0) || !(coarse_step > 0.0)) throw UsageError("beta_tilde_grid: steps must be positive");
  std::vector<double> grid;
  // Multiply rather than accumulate so grid points are exact decimals where possible.
  for (int i = 0;; ++i) {
    const double b = i * fine_step;
    if (b > fine_end + 1e-9 * fine_step) break;
    grid.push_back(b);
  }
  const double start = grid.empty() ? 0.0 : grid.back();
  for (int i = 1;; ++i) {
    const double b = start + i * coarse_step;
    if (b > coarse_end + 1e-9 * coarse_step) break;
    grid.push_back(b);
  }
  return grid;
}

// ============================================================================
// Moves
// ============================================================================

Proposal draw_proposal(std::size_t coordinates, double theta_max, Rng& rng) {
  if (coordinates < 2) throw UsageError("draw_proposal: need at least two coordinates");
  std::uniform_int_distribution<std::size_t> first(0, coordinates - 1);
  std::uniform_int_distribution<std::size_t> second(0, coordinates - 2);
  std::uniform_real_distribution<double> angle(-theta_max, theta_max);
  const std::size_t u = first(rng);
  std::size_t v = second(rng);
  if (v >= u) ++v;
  const double theta = angle(rng);
  return {u, v, std::cos(theta), std::sin(theta)};
}

bool metropolis_accept(double delta_energy, double beta, Rng& rng) {
  // Always draw, so that routes whose ΔH differ by rounding stay in step.
  const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double x = beta * delta_energy;
  if (x <= 0.0) return true;
  return r < std::exp(-x);
}

bool metropolis_step(const CouplingContext& ctx, ColoredState& state, double beta, double theta_max,
                     Rng& rng) {
  if (ctx.n() != state.n()) throw UsageError("metropolis_step: state and context disagree on n");
  const Proposal p = draw_proposal(state.size(), theta_max, rng);
  ColoredState next = state;
  next.rotate(p.u, p.v, p.cos_theta, p.sin_theta);
  const double delta = quartic_energy(ctx, state.n_colors(), next.values()) -
                       quartic_energy(ctx, state.n_colors(), state.values());
  if (!metropolis_accept(delta, beta, rng)) return false;
  state = std::move(next);
  return true;
}

// ============================================================================
// Incremental chain
// ============================================================================

namespace {

constexpr std::size_t kRefreshEvery = 1u << 16;  // accepted moves between full rebuilds

std::vector<double> build_x(std::span<const double> phi, int nc, const Contraction& c) {
  const std::size_t ncz = static_cast<std::size_t>(nc);
  const std::size_t d = c.kept_dim * ncz;
  std::vector<double> x(d * d, 0.0), row(d);
  for (std::uint32_t s = 0; s < c.summed_dim; ++s) {
    for (std::uint32_t r = 0; r < c.kept_dim; ++r) {
      const double* src = phi.data() + static_cast<std::size_t>(c.config[s * c.kept_dim + r]) * ncz;
      std::copy(src, src + ncz, row.data() + r * ncz);
    }
    for (std::size_t i = 0; i < d; ++i) {
      const double ri = row[i];
      if (ri == 0.0) continue;
      for (std::size_t j = i; j < d; ++j) x[i * d + j] += ri * row[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i * d + j] = x[j * d + i];
  return x;
}

double x_energy(const std::vector<double>& x, std::size_t d, int nc) {
  const std::size_t ncz = static_cast<std::size_t>(nc);
  double s2 = 0.0, t2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t r = i / ncz, mu = i % ncz;
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t rp = j / ncz, nu = j % ncz;
      const double xij = x[i * d + j];
      s2 += xij * xij;
      t2 += xij * x[(r * ncz + nu) * d + rp * ncz + mu];
    }
  }
  return 0.5 * nc * (2.0 * s2 - t2);
}

}  // namespace

MetropolisChain::MetropolisChain(const CouplingContext& ctx, ColoredState initial, std::uint64_t seed)
    : ctx_(&ctx), state_(std::move(initial)), rng_(seed), nc_(state_.n_colors()) {
  if (ctx.n() != state_.n()) throw UsageError("MetropolisChain: state and context disagree on n");
  if (state_.size() < 2) throw UsageError("MetropolisChain: need at least two coordinates");
  pending_.resize(ctx.contractions().size());
  refresh();
}

void MetropolisChain::refresh() {
  const auto cs = ctx_->contractions();
  x_.resize(cs.size());
  energy_ = 0.0;
  for (std::size_t c = 0; c < cs.size(); ++c) {
    x_[c] = build_x(state_.values(), nc_, cs[c]);
    energy_ += cs[c].weight * x_energy(x_[c], cs[c].kept_dim * static_cast<std::size_t>(nc_), nc_);
  }
  accepted_since_refresh_ = 0;
}

double MetropolisChain::delta_energy(const Proposal& p, double d0, double d1) {
  const auto cs = ctx_->contractions();
  const std::size_t ncz = static_cast<std::size_t>(nc_);
  const std::uint32_t k0 = static_cast<std::uint32_t>(p.u / ncz), k1 = static_cast<std::uint32_t>(p.v / ncz);
  const std::size_t mu0 = p.u % ncz, mu1 = p.v % ncz;
  const auto phi = state_.values();
  double total = 0.0;

  for (std::size_t ci = 0; ci < cs.size(); ++ci) {
    const Contraction& c = cs[ci];
    const std::size_t d = c.kept_dim * ncz;
    const std::uint32_t a0 = c.summed[k0], a1 = c.summed[k1];
    const std::size_t j0 = c.kept[k0] * ncz + mu0, j1 = c.kept[k1] * ncz + mu1;
    const bool same = a0 == a1;

    row0_.resize(d);
    row1_.resize(d);
    for (std::uint32_t r = 0; r < c.kept_dim; ++r) {
      const double* s0 = phi.data() + static_cast<std::size_t>(c.config[a0 * c.kept_dim + r]) * ncz;
      const double* s1 = phi.data() + static_cast<std::size_t>(c.config[a1 * c.kept_dim + r]) * ncz;
      std::copy(s0, s0 + ncz, row0_.data() + r * ncz);
      std::copy(s1, s1 + ncz, row1_.data() + r * ncz);
    }
    const double* m0 = row0_.data();
    const double* m1 = row1_.data();

    // Change of X_{ij} when row a0 moves by d0 e_{j0} and row a1 by d1 e_{j1}.
    auto change = [&](std::size_t i, std::size_t j) {
      double e = 0.0;
      if (i == j0) e += d0 * m0[j];
      if (j == j0) e += d0 * m0[i];
      if (i == j1) e += d1 * m1[j];
      if (j == j1) e += d1 * m1[i];
      if (same) {
        const double di = (i == j0 ? d0 : 0.0) + (i == j1 ? d1 : 0.0);
        const double dj = (j == j0 ? d0 : 0.0) + (j == j1 ? d1 : 0.0);
        e += di * dj;
      } else {
        if (i == j0 && j == j0) e += d0 * d0;
        if (i == j1 && j == j1) e += d1 * d1;
      }
      return e;
    };
    auto swapped = [&](std::size_t i, std::size_t j) {
      return (i / ncz) * ncz + j % ncz;  // row index of σ(i, j); column is the mirror
    };

    const std::vector<double>& x = x_[ci];
    auto& pend = pending_[ci];
    pend.clear();
    double acc = 0.0;
    auto visit = [&](std::size_t i, std::size_t j) {
      const double e = change(i, j);
      if (e == 0.0) return;
      const std::size_t si = swapped(i, j), sj = (j / ncz) * ncz + i % ncz;
      const double es = change(si, sj);
      const std::size_t idx = i * d + j;
      acc += 4.0 * e * x[idx] + 2.0 * e * e - 2.0 * e * x[si * d + sj] - e * es;
      pend.emplace_back(idx, e);
    };
    const std::size_t rows[2] = {j0, j1};
    const std::size_t nrows = j0 == j1 ? 1 : 2;
    for (std::size_t t = 0; t < nrows; ++t)
      for (std::size_t j = 0; j < d; ++j) visit(rows[t], j);
    for (std::size_t t = 0; t < nrows; ++t)
      for (std::size_t i = 0; i < d; ++i)
        if (i != j0 && i != j1) visit(i, rows[t]);

    total += c.weight * 0.5 * nc_ * acc;
  }
  return total;
}

void MetropolisChain::commit() {
  for (std::size_t ci = 0; ci < x_.size(); ++ci)
    for (const auto& [idx, e] : pending_[ci]) x_[ci][idx] += e;
}

bool MetropolisChain::step(double beta, double theta_max) {
  const Proposal p = draw_proposal(state_.size(), theta_max, rng_);
  const auto phi = state_.values();
  const double x = phi[p.u], y = phi[p.v];
  const double d0 = (p.cos_theta * x - p.sin_theta * y) - x;
  const double d1 = (p.sin_theta * x + p.cos_theta * y) - y;
  const double delta = delta_energy(p, d0, d1);
  if (!metropolis_accept(delta, beta, rng_)) return false;
  state_.rotate(p.u, p.v, p.cos_theta, p.sin_theta);
  commit();
  energy_ += delta;
  if (++accepted_since_refresh_ >= kRefreshEvery) refresh();
  return true;
}

double MetropolisChain::sweep(double beta, double theta_max) {
  const std::size_t moves = state_.size();
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < moves; ++i) accepted += step(beta, theta_max) ? 1 : 0;
  return static_cast<double>(accepted) / static_cast<double>(moves);
}

// ============================================================================
// Protocols
// ============================================================================

namespace {

double adapt_theta(double theta, double acceptance, double low, double high) {
  if (acceptance < low) theta /= 1.05;
  else if (acceptance > high) theta *= 1.05;
  return std::clamp(theta, 1e-9, std::numbers::pi);
}

Estimate summarize(const std::vector<double>& series) {
  return series.size() >= 2 ? mean_blocked(series) : Estimate{series.front(), 0.0};
}

}  // namespace

ChainRecord run_chain(const CouplingContext& ctx, const MCConfig& config, const Schedule& schedule,
                      std::optional<ColoredState> initial) {
  config.validate();
  if (ctx.n() != config.n) throw UsageError("run_chain: config and context disagree on n");
  ColoredState start = initial ? std::move(*initial)
                               : random_state(config.n, config.n_colors, derive_seed(config.seed, 0));
  if (start.n() != config.n || start.n_colors() != config.n_colors)
    throw UsageError("run_chain: initial state does not match (n, n_colors)");
  // Entry check at the energy tolerance; rotations keep the norm from here on.
  if (std::abs(start.norm_squared() - 1.0) > kEnergyNormTolerance)
    throw InvalidStateError("run_chain: initial state is not normalized");

  MetropolisChain chain(ctx, std::move(start), derive_seed(config.seed, 1));
  const double b0 = beta0(config.n);
  double theta = config.theta_max;
  ChainRecord record;

  for (const Leg& leg : schedule.legs()) {
    chain.refresh();
    const int burn = leg.mc_steps / 2;
    const int measure = leg.mc_steps - burn;
    for (int i = 0; i < burn; ++i) {
      const double acc = chain.sweep(leg.beta, theta);
      if (config.adapt) theta = adapt_theta(theta, acc, config.target_low, config.target_high);
    }
    std::vector<double> series;
    double acc_sum = 0.0;
    for (int i = 0; i < measure; ++i) {
      acc_sum += chain.sweep(leg.beta, theta);
      if ((i + 1) % config.steps_per_measurement == 0) series.push_back(chain.energy());
    }
    if (series.empty()) series.push_back(chain.energy());

    LegRecord lr;
    lr.beta = leg.beta;
    lr.beta_tilde = leg.beta / b0;
    lr.energy = summarize(series);
    lr.acceptance = acc_sum / measure;
    lr.theta_max = theta;
    lr.mc_steps = leg.mc_steps;
    record.legs.push_back(lr);
    if (config.record_snapshots) record.snapshots.push_back(chain.state());
  }
  return record;
}

HysteresisResult hysteresis(const CouplingContext& ctx, const MCConfig& config, double beta_max,
                            double delta_beta, int steps_per_beta, int equilibration_steps) {
  if (equilibration_steps <= 0) equilibration_steps = 10 * steps_per_beta;
  const Schedule schedule = Schedule::hysteresis_loop(beta_max, delta_beta, steps_per_beta, equilibration_steps);
  ChainRecord all = run_chain(ctx, config, schedule);
  const std::size_t half = all.legs.size() / 2;
  HysteresisResult out;
  out.heating.legs.assign(all.legs.begin(), all.legs.begin() + static_cast<std::ptrdiff_t>(half));
  out.cooling.legs.assign(all.legs.begin() + static_cast<std::ptrdiff_t>(half), all.legs.end());
  if (!all.snapshots.empty()) {
    out.heating.snapshots.assign(all.snapshots.begin(), all.snapshots.begin() + static_cast<std::ptrdiff_t>(half));
    out.cooling.snapshots.assign(all.snapshots.begin() + static_cast<std::ptrdiff_t>(half), all.snapshots.end());
  }
  return out;
}

// ============================================================================
// Replicas
// ============================================================================

ReplicaPair::ReplicaPair(const CouplingContext& ctx, int n_colors, std::uint64_t seed_a, std::uint64_t seed_b)
    : a_(ctx, random_state(ctx.n(), n_colors, derive_seed(seed_a, 0)), derive_seed(seed_a, 1)),
      b_(ctx, random_state(ctx.n(), n_colors, derive_seed(seed_b, 0)), derive_seed(seed_b, 1)) {}

double ReplicaPair::overlap() const {
  const auto x = a_.state().values(), y = b_.state().values();
  double q = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) q += x[i] * y[i];
  return q;
}

OverlapEstimate overlap(const CouplingContext& ctx, ReplicaPair& pair, double beta,
                        const OverlapOptions& options) {
  if (options.measurements < 1 || options.cadence < 1) throw UsageError("overlap: measurements and cadence must be >= 1");
  if (!(options.theta_max > 0.0) || options.theta_max > std::numbers::pi)
    throw UsageError("overlap: theta_max must lie in (0, π]");
  const int window = options.measurements * options.cadence;
  const int burn = options.burn_in < 0 ? 10 * window : options.burn_in;
  const double scale = static_cast<double>(pair.first().state().size());

  double theta_a = options.theta_max, theta_b = options.theta_max;
  for (int i = 0; i < burn; ++i) {
    const double acc_a = pair.first().sweep(beta, theta_a);
    const double acc_b = pair.second().sweep(beta, theta_b);
    // Adapt during the first half of the burn-in only.
    if (options.adapt && 2 * i < burn) {
      theta_a = adapt_theta(theta_a, acc_a, 0.3, 0.6);
      theta_b = adapt_theta(theta_b, acc_b, 0.3, 0.6);
    }
  }
  std::vector<double> q2;
  double ea = 0.0, eb = 0.0;
  for (int m = 0; m < options.measurements; ++m) {
    for (int s = 0; s < options.cadence; ++s) {
      pair.first().sweep(beta, theta_a);
      pair.second().sweep(beta, theta_b);
    }
    const double q = pair.overlap();
    q2.push_back(q * q * scale);
    ea += pair.first().energy();
    eb += pair.second().energy();
  }
  OverlapEstimate out;
  out.beta = beta;
  out.beta_tilde = beta / beta0(ctx.n());
  out.rescaled_q2 = summarize(q2);
  out.energy_first = ea / options.measurements;
  out.energy_second = eb / options.measurements;
  return out;
}

std::vector<OverlapEstimate> overlap_scan(const CouplingContext& ctx, int n_colors,
                                          std::span<const double> betas, std::uint64_t seed,
                                          const OverlapOptions& options) {
  if (options.pairs < 1) throw UsageError("overlap_scan: pairs must be >= 1");
  const auto pairs = static_cast<std::size_t>(options.pairs);
  std::vector<std::vector<OverlapEstimate>> runs(pairs);
  parallel_for(pairs, [&](std::size_t p) {
    ReplicaPair pair(ctx, n_colors, derive_seed(seed, 2 * p), derive_seed(seed, 2 * p + 1));
    for (double b : betas) runs[p].push_back(overlap(ctx, pair, b, options));
  });
  if (pairs == 1) return runs[0];

  // Frozen replicas make q² depend on the pair, so the error comes from the spread between pairs.
  std::vector<OverlapEstimate> out;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    std::vector<double> q2;
    OverlapEstimate e = runs[0][i];
    e.energy_first = e.energy_second = 0.0;
    for (const auto& r : runs) {
      q2.push_back(r[i].rescaled_q2.mean);
      e.energy_first += r[i].energy_first / static_cast<double>(pairs);
      e.energy_second += r[i].energy_second / static_cast<double>(pairs);
    }
    e.rescaled_q2 = mean_iid(q2);
    out.push_back(e);
  }
  return out;
}

// ============================================================================
// Ground states
// ============================================================================

double polish_on_sphere(const CouplingContext& ctx, std::vector<double>& phi, int n_colors,
                        double gradient_tolerance, int max_iterations) {
  auto normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    const double inv = 1.0 / std::sqrt(s);
    for (double& x : v) x *= inv;
  };
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  normalize(phi);
  std::vector<double> grad(phi.size()), trial(phi.size()), trial_grad(phi.size());
  double f = quartic_energy_and_gradient(ctx, n_colors, phi, grad);
  std::vector<double> g = project_tangent(phi, grad);
  double gn = std::sqrt(dot(g, g));
  double step = 0.1;

  for (int it = 0; it < max_iterations && gn >= gradient_tolerance; ++it) {
    bool moved = false;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t i = 0; i < phi.size(); ++i) trial[i] = phi[i] - step * g[i];
      normalize(trial);
      const double ft = quartic_energy_and_gradient(ctx, n_colors, trial, trial_grad);
      // Slack of a few ulps: near the minimum the decrease drops below rounding.
      if (ft <= f - 1e-4 * step * gn * gn + 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f)) {
        std::vector<double> gt = project_tangent(trial, trial_grad);
        // Barzilai-Borwein length for the next trial step.
        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) {
          const double s = trial[i] - phi[i], y = gt[i] - g[i];
          ss += s * s;
          sy += s * y;
        }
        step = sy > 0.0 ? std::clamp(ss / sy, 1e-6, 1e3) : std::min(2.0 * step, 1e3);
        phi.swap(trial);
        f = ft;
        g = std::move(gt);
        gn = std::sqrt(dot(g, g));
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return gn;
}

MinimumResult find_minimum(const CouplingContext& ctx, int n_colors, int restarts, std::uint64_t seed,
                           const MinimizeOptions& options) {
  if (restarts < 1) throw UsageError("find_minimum: restarts must be >= 1");
  if (n_colors < 1 || n_colors > 64) throw UsageError("find_minimum: n_colors must lie in [1, 64]");
  if (options.anneal_legs < 0 || options.anneal_steps < 1)
    throw UsageError("find_minimum: anneal legs must be >= 0 and steps >= 1");
  ctx.contractions();

  const double b0 = beta0(ctx.n());
  std::vector<double> betas;
  for (int i = 0; i < options.anneal_legs; ++i) {
    const double frac = options.anneal_legs == 1 ? 1.0 : static_cast<double>(i) / (options.anneal_legs - 1);
    betas.push_back(b0 * 0.5 * std::pow(2.0 * options.anneal_beta_tilde_max, frac));
  }

  struct Outcome {
    double energy = 0.0;
    double gradient_norm = 0.0;
    std::vector<double> phi;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(restarts));
  parallel_for(outcomes.size(), [&](std::size_t r) {
    const std::uint64_t s = derive_seed(seed, r);
    ColoredState state = random_state(ctx.n(), n_colors, derive_seed(s, 0));
    if (!betas.empty()) {
      MetropolisChain chain(ctx, std::move(state), derive_seed(s, 1));
      double theta = 0.5;
      for (double b : betas)
        for (int i = 0; i < options.anneal_steps; ++i) theta = adapt_theta(theta, chain.sweep(b, theta), 0.3, 0.6);
      state = chain.state();
    }
    std::vector<double> phi(state.values().begin(), state.values().end());
    Outcome& o = outcomes[r];
    o.gradient_norm = polish_on_sphere(ctx, phi, n_colors, options.gradient_tolerance, options.max_iterations);
    o.energy = quartic_energy(ctx, n_colors, phi);
    o.phi = std::move(phi);
  });

  std::size_t best = 0;
  MinimumResult result{0.0, 0.0, ColoredState::normalized(ctx.n(), n_colors, outcomes[0].phi), {}, 0.0};
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    result.restart_energies.push_back(outcomes[r].energy);
    if (outcomes[r].energy < outcomes[best].energy) best = r;
  }
  result.energy = outcomes[best].energy;
  result.rescaled = 2.0 * result.energy / n_colors;
  result.argmin = ColoredState::normalized(ctx.n(), n_colors, outcomes[best].phi);
  result.gradient_norm = outcomes[best].gradient_norm;
  return result;
}

std::vector<FrustrationRow> frustration_scan(const CouplingContext& ctx, std::span<const int> n_colors,
                                             int restarts, std::uint64_t seed, const MinimizeOptions& options) {
  std::vector<FrustrationRow> rows;
  for (int nc : n_colors) {
    if (nc < 1 || nc > 32) throw UsageError("frustration_scan: N_c must lie in [1, 32]");
    const MinimumResult m = find_minimum(ctx, nc, restarts, derive_seed(seed, static_cast<std::uint64_t>(nc)), options);
    rows.push_back({nc, m.energy, m.rescaled});
  }
  return rows;
}

}  // namespace colorent
