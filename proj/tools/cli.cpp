#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "colorent/coupling.hpp"
#include "colorent/error.hpp"
#include "colorent/field.hpp"
#include "colorent/largenc.hpp"
#include "colorent/moments.hpp"
#include "colorent/parallel.hpp"
#include "colorent/sampler.hpp"
#include "colorent/state_io.hpp"
#include "colorent/stats.hpp"

namespace colorent::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ============================================================================
// Run directory and CSV output
// ============================================================================

std::string utc_stamp(std::chrono::system_clock::time_point t, const char* fmt) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, fmt, &tm);
  return buf;
}

class Run {
 public:
  Run(std::string command, fs::path root, std::ostream& out)
      : command_(std::move(command)), root_(std::move(root)), out_(out),
        started_(std::chrono::system_clock::now()) {}

  std::ostream& out() { return out_; }
  const std::string& command() const { return command_; }
  std::chrono::system_clock::time_point started() const { return started_; }
  const std::vector<fs::path>& outputs() const { return outputs_; }

  const fs::path& dir() {
    if (dir_.empty()) {
      const std::string base = command_ + "-" + utc_stamp(started_, "%Y%m%dT%H%M%SZ");
      fs::path candidate = root_ / base;
      for (int i = 1; fs::exists(candidate); ++i) candidate = root_ / (base + "-" + std::to_string(i));
      fs::create_directories(candidate);
      dir_ = candidate;
    }
    return dir_;
  }

  std::ofstream open(const fs::path& relative) {
    const fs::path path = dir() / relative;
    fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write " + path.string());
    outputs_.push_back(relative);
    return f;
  }

  void save(const std::string& name, const ColoredState& state) {
    auto f = open(fs::path("states") / (name + ".json"));
    f << state_to_json(state);
  }

 private:
  std::string command_;
  fs::path root_;
  std::ostream& out_;
  std::chrono::system_clock::time_point started_;
  fs::path dir_;
  std::vector<fs::path> outputs_;
};

struct Cell {
  std::string text;
  Cell(double v) : text(format_double(v)) {}
  Cell(int v) : text(std::to_string(v)) {}
  Cell(std::int64_t v) : text(std::to_string(v)) {}
  Cell(std::uint64_t v) : text(std::to_string(v)) {}
  Cell(std::size_t v, int) : text(std::to_string(v)) {}
  Cell(std::uint32_t v) : text(std::to_string(v)) {}
  Cell(const char* s) : text(s) {}
  Cell(std::string s) : text(std::move(s)) {}
  Cell(std::optional<double> v) : text(v ? format_double(*v) : "") {}
};

void csv_row(std::ostream& f, std::initializer_list<Cell> cells) {
  bool first = true;
  for (const Cell& c : cells) {
    if (!first) f << ',';
    f << c.text;
    first = false;
  }
  f << '\n';
}

void csv_header(std::ostream& f, std::initializer_list<const char*> names) {
  bool first = true;
  for (const char* n : names) {
    if (!first) f << ',';
    f << n;
    first = false;
  }
  f << '\n';
}

// Columns shared by every Monte Carlo trace.
#define TRACE_COLUMNS "leg_index", "beta", "beta_tilde", "mean_H", "stderr_H", "rescaled_H", "acceptance", "theta_max"

void trace_row(std::ostream& f, std::size_t index, const LegRecord& leg, double h_nc,
               std::initializer_list<Cell> extra) {
  f << index << ',' << format_double(leg.beta) << ',' << format_double(leg.beta_tilde) << ','
    << format_double(leg.energy.mean) << ',' << format_double(leg.energy.stderr_) << ','
    << format_double(leg.energy.mean / h_nc) << ',' << format_double(leg.acceptance) << ','
    << format_double(leg.theta_max);
  for (const Cell& c : extra) f << ',' << c.text;
  f << '\n';
}

// ============================================================================
// Subcommand options
// ============================================================================

struct Options {
  // shared
  std::string out = "runs";
  std::optional<std::uint64_t> seed;
  std::string config;

  std::string action = "dump";
  int n = 4;
  int nc = 2;
  std::vector<int> nc_list;
  std::uint32_t k = 0, kp = 0;
  std::string state, initial;
  int order = 1;
  bool exact = false;
  std::size_t samples = 0;

  std::vector<double> beta_tilde;
  double fine_step = 0.1, fine_end = 3.0, coarse_step = 1.0, coarse_end = 10.0;
  int steps = 1000;
  int steps_per_measurement = 1;
  double theta_max = 0.5;
  std::string protocol = "fresh";
  bool snapshots = false;

  double beta_max = 130.0, delta_beta = 4.0;
  int equilibration = 0;

  int measurements = 50, cadence = 10, burn_in = -1, pairs = 1;

  int restarts = 20;
  MinimizeOptions minimize;

  double tol = 1e-13;
  int max_iter = 10000;
  double damping = 0.5;
};

using Handler = std::function<void(Options&, Run&)>;

void require_n(int n, int lo, int hi, const char* what) {
  if (n < lo || n > hi)
    throw UsageError(std::string(what) + ": --n must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

std::string subset_string(std::uint32_t mask) {
  std::string s = "{";
  bool first = true;
  for (int q = 0; q < 32; ++q)
    if (mask >> q & 1u) {
      if (!first) s += ' ';
      s += std::to_string(q);
      first = false;
    }
  return s + "}";
}

// ============================================================================
// Handlers
// ============================================================================

void cmd_coupling(Options& o, Run& run) {
  if (o.action != "dump") throw UsageError("coupling: the only action is 'dump'");
  require_n(o.n, 2, 24, "coupling");
  const CouplingContext ctx(o.n);
  {
    auto f = run.open("data.csv");
    csv_header(f, {"s", "t", "numerator", "denominator", "value"});
    for (int s = 0; s <= o.n; ++s)
      for (int t = 0; t <= o.n; ++t)
        csv_row(f, {s, t, ctx.g_hat_numerator(s, t), ctx.g_hat_denominator(), ctx.g_hat_value(s, t)});
  }
  if (o.n <= 8) {
    if (o.k >= ctx.dim() || o.kp >= ctx.dim()) throw UsageError("coupling: --k and --kp must be < 2^n");
    auto f = run.open("delta_row.csv");
    csv_header(f, {"k", "k_prime", "l", "l_prime", "delta_numerator", "delta_tilde_numerator", "denominator",
                   "delta", "delta_tilde"});
    const double den = static_cast<double>(ctx.g_hat_denominator());
    for (std::uint32_t l = 0; l < ctx.dim(); ++l)
      for (std::uint32_t lp = 0; lp < ctx.dim(); ++lp) {
        const auto d = ctx.delta_numerator(o.k, o.kp, l, lp);
        const auto dt = ctx.delta_tilde_numerator(o.k, o.kp, l, lp);
        csv_row(f, {o.k, o.kp, l, lp, d, dt, ctx.g_hat_denominator(), d / den, dt / den});
      }
  } else {
    run.out() << "Δ row skipped: n > 8\n";
  }
  run.out() << "n = " << o.n << ", n_A = " << ctx.n_a() << ", common denominator " << ctx.g_hat_denominator()
            << ", Δ̃ row sum " << format_double(to_double(ctx.delta_tilde_row_sum())) << "\n";
}

void cmd_energy(Options& o, Run& run, std::uint64_t seed) {
  std::optional<ColoredState> loaded;
  if (!o.state.empty()) loaded = load_state(o.state);
  const int n = loaded ? loaded->n() : o.n;
  const int nc = loaded ? loaded->n_colors() : o.nc;
  require_n(n, 2, kMaxDenseQubits, "energy");
  const ColoredState state = loaded ? std::move(*loaded) : random_state(n, nc, seed);
  const CouplingContext ctx(n);
  const PurityReport r = energy(ctx, state);
  {
    auto f = run.open("data.csv");
    csv_header(f, {"subset_mask", "subset", "H_A"});
    for (std::size_t i = 0; i < r.bipartitions.size(); ++i)
      csv_row(f, {r.bipartitions[i].mask, subset_string(r.bipartitions[i].mask), r.per_bipartition[i]});
  }
  run.save("state", state);
  run.out() << "H = " << format_double(r.total) << "\nlower bound N_c/(2 N_A) = " << format_double(r.lower_bound)
            << "\nrescaled 2H/N_c = " << format_double(2.0 * r.total / nc) << "\n";
}

void cmd_cumulants(Options& o, Run& run, std::uint64_t seed) {
  require_n(o.n, 2, 24, "cumulants");
  if (o.order < 1 || o.order > 5) throw UsageError("cumulants: --order must lie in [1, 5]");
  if (!o.exact && o.samples == 0 && o.order > 3)
    throw UsageError("cumulants: orders above 3 need --samples");
  if (o.exact && o.order > 3) throw UsageError("cumulants: --exact supports orders 1..3");

  std::vector<CumulantReport> exact, mc;
  if (o.exact) exact = exact_cumulants(o.n, o.order);
  if (o.samples > 0) mc = mc_cumulants(o.n, o.nc, o.order, o.samples, seed);

  auto f = run.open("data.csv");
  csv_header(f, {"order", "exact", "cactus", "mc_mean", "mc_stderr", "N", "N_A"});
  const auto dim = std::uint64_t{1} << o.n, dim_a = std::uint64_t{1} << (o.n / 2);
  for (int m = 1; m <= o.order; ++m) {
    const std::size_t i = static_cast<std::size_t>(m - 1);
    std::optional<double> ex, mean, err, cactus;
    if (m <= 3) cactus = cactus_cumulant(o.n, m);
    if (!exact.empty()) ex = to_double(*exact[i].exact);
    if (!mc.empty()) {
      mean = mc[i].mc->mean;
      err = mc[i].mc->stderr_;
    }
    csv_row(f, {m, ex, cactus, mean, err, dim, dim_a});
    run.out() << "order " << m;
    if (!exact.empty()) run.out() << "  exact " << exact[i].exact->str() << " = " << format_double(*ex);
    if (cactus) run.out() << "  cactus " << format_double(*cactus);
    if (mean) run.out() << "  mc " << format_double(*mean) << " ± " << format_double(*err);
    run.out() << "\n";
  }
}

void cmd_sample(Options& o, Run& run, std::uint64_t seed) {
  require_n(o.n, 2, kMaxDenseQubits, "sample");
  if (o.samples == 0) throw UsageError("sample: --samples must be positive");
  const auto energies = sample_energies(o.n, o.nc, o.samples, seed);
  {
    auto f = run.open("data.csv");
    csv_header(f, {"index", "energy"});
    for (std::size_t i = 0; i < energies.size(); ++i) csv_row(f, {Cell(i, 0), energies[i]});
  }
  const Estimate e = mean_iid(energies);
  run.out() << "⟨H⟩₀ = " << format_double(e.mean) << " ± " << format_double(e.stderr_) << "\n";
}

MCConfig mc_config(const Options& o, int nc, std::uint64_t seed) {
  MCConfig c;
  c.n = o.n;
  c.n_colors = nc;
  c.seed = seed;
  c.steps_per_measurement = o.steps_per_measurement;
  c.theta_max = o.theta_max;
  c.record_snapshots = o.snapshots;
  c.validate();
  return c;
}

std::vector<double> grid_of(const Options& o) {
  return o.beta_tilde.empty() ? beta_tilde_grid(o.fine_step, o.fine_end, o.coarse_step, o.coarse_end)
                              : o.beta_tilde;
}

void cmd_sweep(Options& o, Run& run, std::uint64_t seed) {
  require_n(o.n, 3, 7, "sweep");
  if (o.nc_list.empty()) o.nc_list = {20};
  for (int nc : o.nc_list)
    if (nc < 2 || nc > 20) throw UsageError("sweep: every --nc must lie in [2, 20]");
  if (o.protocol != "fresh" && o.protocol != "annealed")
    throw UsageError("sweep: --protocol must be 'fresh' or 'annealed'");
  const std::vector<double> grid = grid_of(o);
  if (grid.empty()) throw UsageError("sweep: empty β̃ grid");
  if (o.steps < 1) throw UsageError("sweep: --steps must be >= 1");

  const CouplingContext ctx(o.n);
  const auto cs = ctx.contractions();
  double cost = 0.0;  // multiply-adds, roughly
  for (int nc : o.nc_list)
    cost += static_cast<double>(grid.size()) * o.steps * ctx.dim() * nc * static_cast<double>(cs.size()) * 8.0 *
            cs[0].kept_dim * nc;
  if (cost > 2e13) throw UsageError("sweep: (n, N_c, grid, steps) exceeds the resource guard; shrink the grid or steps");

  const double b0 = beta0(o.n);
  std::vector<std::vector<ChainRecord>> records(o.nc_list.size());
  for (std::size_t a = 0; a < o.nc_list.size(); ++a) {
    const int nc = o.nc_list[a];
    const std::uint64_t nc_seed = derive_seed(seed, static_cast<std::uint64_t>(nc));
    if (o.protocol == "fresh") {
      records[a].resize(grid.size());
      parallel_for(grid.size(), [&](std::size_t g) {
        records[a][g] = run_chain(ctx, mc_config(o, nc, derive_seed(nc_seed, g)), Schedule::fixed(grid[g] * b0, o.steps));
      });
    } else {
      std::vector<double> betas;
      for (double bt : grid) betas.push_back(bt * b0);
      records[a].push_back(run_chain(ctx, mc_config(o, nc, nc_seed), Schedule::anneal(betas, o.steps)));
    }
  }

  auto f = run.open("data.csv");
  csv_header(f, {TRACE_COLUMNS, "n_colors"});
  for (std::size_t a = 0; a < o.nc_list.size(); ++a) {
    const int nc = o.nc_list[a];
    const double h_nc = energy_prediction(o.n, nc);
    std::size_t index = 0;
    for (std::size_t r = 0; r < records[a].size(); ++r) {
      const ChainRecord& rec = records[a][r];
      for (std::size_t l = 0; l < rec.legs.size(); ++l, ++index) {
        trace_row(f, index, rec.legs[l], h_nc, {nc});
        if (o.snapshots)
          run.save("nc" + std::to_string(nc) + "-leg" + std::to_string(index), rec.snapshots[l]);
      }
    }
  }
  run.out() << "sweep: " << o.nc_list.size() << " color counts × " << grid.size() << " β̃ points\n";
}

void cmd_anneal(Options& o, Run& run, std::uint64_t seed) {
  require_n(o.n, 2, kMaxDenseQubits, "anneal");
  if (o.beta_tilde.empty()) throw UsageError("anneal: --beta-tilde needs at least one value");
  std::optional<ColoredState> init;
  if (!o.initial.empty()) {
    init = load_state(o.initial);
    o.n = init->n();
    o.nc = init->n_colors();
  }
  const CouplingContext ctx(o.n);
  std::vector<double> betas;
  for (double bt : o.beta_tilde) betas.push_back(bt * beta0(o.n));
  MCConfig cfg = mc_config(o, o.nc, seed);
  cfg.record_snapshots = true;
  const ChainRecord rec = run_chain(ctx, cfg, Schedule::anneal(betas, o.steps), init);

  auto f = run.open("data.csv");
  csv_header(f, {TRACE_COLUMNS});
  const double h_nc = energy_prediction(o.n, o.nc);
  for (std::size_t l = 0; l < rec.legs.size(); ++l) {
    trace_row(f, l, rec.legs[l], h_nc, {});
    if (o.snapshots) run.save("leg" + std::to_string(l), rec.snapshots[l]);
  }
  run.save("final", rec.snapshots.back());
  run.out() << "final ⟨H⟩ = " << format_double(rec.legs.back().energy.mean) << " ± "
            << format_double(rec.legs.back().energy.stderr_) << "\n";
}

void cmd_hysteresis(Options& o, Run& run, std::uint64_t seed) {
  require_n(o.n, 2, kMaxDenseQubits, "hysteresis");
  const CouplingContext ctx(o.n);
  const HysteresisResult h =
      hysteresis(ctx, mc_config(o, o.nc, seed), o.beta_max, o.delta_beta, o.steps, o.equilibration);
  auto f = run.open("data.csv");
  csv_header(f, {TRACE_COLUMNS, "branch"});
  const double h_nc = energy_prediction(o.n, o.nc);
  std::size_t index = 0;
  for (const auto& leg : h.heating.legs) trace_row(f, index++, leg, h_nc, {"heating"});
  for (const auto& leg : h.cooling.legs) trace_row(f, index++, leg, h_nc, {"cooling"});

  double worst = 0.0;
  const std::size_t m = h.heating.legs.size();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& a = h.heating.legs[i].energy;
    const auto& b = h.cooling.legs[m - 1 - i].energy;
    const double s = a.stderr_ + b.stderr_;
    if (s > 0) worst = std::max(worst, std::abs(a.mean - b.mean) / s);
  }
  run.out() << "hysteresis: " << m << " β points per branch, max |heating - cooling| / (σ_heating + σ_cooling) = " << format_double(worst)
            << "\n";
}

void cmd_overlap(Options& o, Run& run, std::uint64_t seed) {
  require_n(o.n, 2, kMaxDenseQubits, "overlap");
  if (o.beta_tilde.empty()) o.beta_tilde = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  const CouplingContext ctx(o.n);
  std::vector<double> betas;
  for (double bt : o.beta_tilde) betas.push_back(bt * beta0(o.n));
  OverlapOptions opt;
  opt.measurements = o.measurements;
  opt.cadence = o.cadence;
  opt.burn_in = o.burn_in;
  opt.pairs = o.pairs;
  opt.theta_max = o.theta_max;
  const auto rows = overlap_scan(ctx, o.nc, betas, seed, opt);
  auto f = run.open("data.csv");
  csv_header(f, {"index", "beta", "beta_tilde", "rescaled_q2", "stderr", "energy_first", "energy_second"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv_row(f, {Cell(i, 0), r.beta, r.beta_tilde, r.rescaled_q2.mean, r.rescaled_q2.stderr_, r.energy_first,
                r.energy_second});
  }
  run.out() << "overlap: " << rows.size() << " β points\n";
}

void check_minimize(const Options& o) {
  require_n(o.n, 2, kMaxDenseQubits, "minimize");
  if (o.restarts < 1) throw UsageError("minimize: --restarts must be >= 1");
  if (!(o.minimize.gradient_tolerance > 0.0)) throw UsageError("minimize: --tol must be positive");
}

void cmd_minimize(Options& o, Run& run, std::uint64_t seed) {
  check_minimize(o);
  if (o.nc < 1 || o.nc > 64) throw UsageError("minimize: --nc must lie in [1, 64]");
  const CouplingContext ctx(o.n);
  const MinimumResult m = find_minimum(ctx, o.nc, o.restarts, seed, o.minimize);
  {
    auto f = run.open("data.csv");
    csv_header(f, {"restart", "energy", "rescaled"});
    for (std::size_t i = 0; i < m.restart_energies.size(); ++i)
      csv_row(f, {Cell(i, 0), m.restart_energies[i], 2.0 * m.restart_energies[i] / o.nc});
  }
  run.save("argmin", m.argmin);
  run.out() << "E0 = " << format_double(m.energy) << "\nrescaled E0 = " << format_double(m.rescaled)
            << "\ntangent gradient norm = " << format_double(m.gradient_norm) << "\n";
}

void cmd_scan(Options& o, Run& run, std::uint64_t seed) {
  check_minimize(o);
  if (o.nc_list.empty()) o.nc_list = {1, 2, 3, 4, 5, 6, 7, 8};
  const CouplingContext ctx(o.n);
  const auto rows = frustration_scan(ctx, o.nc_list, o.restarts, seed, o.minimize);
  auto f = run.open("data.csv");
  csv_header(f, {"n_colors", "E0", "rescaled_E0", "rescaled_bound"});
  for (const auto& r : rows) {
    const double bound = 2.0 * lower_bound(o.n, r.n_colors) / r.n_colors;
    csv_row(f, {r.n_colors, r.energy, r.rescaled, bound});
    run.out() << "N_c = " << r.n_colors << "  rescaled E0 = " << format_double(r.rescaled) << "\n";
  }
}

void cmd_dyson(Options& o, Run& run) {
  require_n(o.n, 2, kMaxQubits, "dyson");
  if (o.beta_tilde.size() != 1) throw UsageError("dyson: --beta-tilde takes exactly one value");
  const CouplingContext ctx(o.n);
  DysonOptions opt;
  opt.tolerance = o.tol;
  opt.max_iterations = o.max_iter;
  opt.damping = o.damping;
  const DysonSolution s = dyson_solve(ctx, o.beta_tilde[0], opt);
  {
    auto f = run.open("data.csv");
    csv_header(f, {"k", "G", "lambda", "residual"});
    for (std::size_t k = 0; k < s.propagator.size(); ++k) csv_row(f, {Cell(k, 0), s.propagator[k], s.lambda, s.residual});
  }
  run.out() << "λ = " << format_double(s.lambda) << "\nG_0 = " << format_double(s.propagator[0])
            << "\nresidual = " << format_double(s.residual) << "\nsymmetric = " << (s.symmetric ? "true" : "false")
            << "\niterations = " << s.iterations << "\n";
}

// ============================================================================
// Parser
// ============================================================================

struct Command {
  CLI::App* app;
  Handler handler;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--out", o.out, "Output root directory");
  sub->add_option("--seed", o.seed, "Master seed (generated and recorded when omitted)");
  sub->add_option("--config", o.config, "key=value file merged below command-line flags");
}

void add_mc(CLI::App* sub, Options& o) {
  sub->add_option("--steps", o.steps, "Monte Carlo sweeps per leg");
  sub->add_option("--steps-per-measurement", o.steps_per_measurement, "Sweeps between recorded energies");
  sub->add_option("--theta-max", o.theta_max, "Initial proposal angle");
}

void add_minimize(CLI::App* sub, Options& o) {
  sub->add_option("--restarts", o.restarts, "Independent restarts");
  sub->add_option("--anneal-legs", o.minimize.anneal_legs, "Annealing legs before polishing");
  sub->add_option("--anneal-steps", o.minimize.anneal_steps, "Sweeps per annealing leg");
  sub->add_option("--anneal-beta-tilde-max", o.minimize.anneal_beta_tilde_max, "Final annealing β̃");
  sub->add_option("--tol", o.minimize.gradient_tolerance, "Tangent gradient tolerance");
  sub->add_option("--max-iter", o.minimize.max_iterations, "Polishing iterations");
}

std::map<std::string, Command> build(CLI::App& app, Options& o) {
  std::map<std::string, Command> cmds;
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->option_defaults()->always_capture_default();
    add_common(s, o);
    return s;
  };
  auto seeded = [&](auto fn) {
    return [fn](Options& opt, Run& run) { fn(opt, run, *opt.seed); };
  };

  {
    auto* s = sub("coupling", "Dump the ĝ table and one Δ row");
    s->add_option("action", o.action, "dump");
    s->add_option("--n", o.n)->required();
    s->add_option("--k", o.k, "Row configuration k");
    s->add_option("--kp", o.kp, "Row configuration k'");
    cmds["coupling"] = {s, cmd_coupling};
  }
  {
    auto* s = sub("energy", "Energy and per-bipartition purities of a state");
    s->add_option("--n", o.n);
    s->add_option("--nc", o.nc);
    s->add_option("--state", o.state, "State file (.json or .csv); random when omitted");
    cmds["energy"] = {s, seeded(cmd_energy)};
  }
  {
    auto* s = sub("cumulants", "β = 0 cumulants: exact, cactus and Monte Carlo");
    s->add_option("--n", o.n)->required();
    s->add_option("--order", o.order);
    s->add_flag("--exact", o.exact, "Exact Wick enumeration");
    s->add_option("--samples", o.samples, "Monte Carlo samples (0 skips)");
    s->add_option("--nc", o.nc);
    cmds["cumulants"] = {s, seeded(cmd_cumulants)};
  }
  {
    auto* s = sub("sample", "Energies of uniform random states");
    s->add_option("--n", o.n)->required();
    s->add_option("--nc", o.nc);
    s->add_option("--samples", o.samples)->required();
    cmds["sample"] = {s, seeded(cmd_sample)};
  }
  {
    auto* s = sub("sweep", "Fixed-β chains over a β̃ grid");
    s->add_option("--n", o.n)->required();
    s->add_option("--nc", o.nc_list, "Color counts")->delimiter(',');
    s->add_option("--beta-tilde", o.beta_tilde, "Explicit β̃ grid")->delimiter(',');
    s->add_option("--fine-step", o.fine_step);
    s->add_option("--fine-end", o.fine_end);
    s->add_option("--coarse-step", o.coarse_step);
    s->add_option("--coarse-end", o.coarse_end);
    s->add_option("--protocol", o.protocol, "fresh: new random start per β; annealed: one chain");
    s->add_flag("--snapshots", o.snapshots, "Save the state at the end of every leg");
    add_mc(s, o);
    cmds["sweep"] = {s, seeded(cmd_sweep)};
  }
  {
    auto* s = sub("anneal", "One chain through a list of β̃ values");
    s->add_option("--n", o.n);
    s->add_option("--nc", o.nc);
    s->add_option("--beta-tilde", o.beta_tilde)->delimiter(',')->required();
    s->add_option("--initial", o.initial, "Initial state file");
    s->add_flag("--snapshots", o.snapshots);
    add_mc(s, o);
    cmds["anneal"] = {s, seeded(cmd_anneal)};
  }
  {
    auto* s = sub("hysteresis", "Heat from β_max to 0 and cool back");
    s->add_option("--n", o.n);
    s->add_option("--nc", o.nc);
    s->add_option("--beta-max", o.beta_max);
    s->add_option("--delta-beta", o.delta_beta);
    s->add_option("--equilibration", o.equilibration, "Sweeps at β_max before heating (0: 10× --steps)");
    add_mc(s, o);
    cmds["hysteresis"] = {s, seeded(cmd_hysteresis)};
  }
  {
    auto* s = sub("overlap", "Replica overlap along an annealed β̃ scan");
    s->add_option("--n", o.n);
    s->add_option("--nc", o.nc);
    s->add_option("--beta-tilde", o.beta_tilde)->delimiter(',');
    s->add_option("--measurements", o.measurements);
    s->add_option("--cadence", o.cadence, "Sweeps between overlap measurements");
    s->add_option("--burn-in", o.burn_in, "Sweeps before measuring (-1: 10× the measurement window)");
    s->add_option("--pairs", o.pairs, "Independent replica pairs; stderr from their spread when > 1");
    s->add_option("--theta-max", o.theta_max);
    cmds["overlap"] = {s, seeded(cmd_overlap)};
  }
  {
    auto* s = sub("minimize", "Ground-state search: anneal, then projected gradient");
    s->add_option("--n", o.n)->required();
    s->add_option("--nc", o.nc);
    add_minimize(s, o);
    cmds["minimize"] = {s, seeded(cmd_minimize)};
  }
  {
    auto* s = sub("scan-frustration", "Rescaled minima over a range of N_c");
    s->add_option("--n", o.n)->required();
    s->add_option("--nc", o.nc_list)->delimiter(',');
    add_minimize(s, o);
    cmds["scan-frustration"] = {s, seeded(cmd_scan)};
  }
  {
    auto* s = sub("dyson", "Large-N_c propagator on the symmetric branch");
    s->add_option("--n", o.n)->required();
    s->add_option("--beta-tilde", o.beta_tilde)->required();
    s->add_option("--tol", o.tol);
    s->add_option("--max-iter", o.max_iter);
    s->add_option("--damping", o.damping);
    cmds["dyson"] = {s, cmd_dyson};
  }
  return cmds;
}

// Flags from a key=value file are appended unless given on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  auto given = [&](const std::string& key) {
    for (const auto& a : args)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::vector<std::string> extra;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config: expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "config" || given(key)) continue;
    if (value == "true") {
      extra.push_back("--" + key);
    } else if (value != "false") {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

std::vector<std::string> split_default(std::string s) {
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

json flag_set(const CLI::App* sub) {
  json flags = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    std::string name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    if (opt->get_expected_min() == 0) {
      flags[name] = opt->count() > 0;
    } else if (opt->get_items_expected_max() > 1) {
      flags[name] = opt->count() > 0 ? opt->results() : split_default(opt->get_default_str());
    } else if (opt->count() > 0) {
      flags[name] = opt->results().back();
    } else if (!opt->get_default_str().empty()) {
      flags[name] = opt->get_default_str();
    }
  }
  return flags;
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void write_manifest(Run& run, const CLI::App* sub, std::uint64_t seed) {
  json flags = flag_set(sub);
  flags["seed"] = std::to_string(seed);
  json outputs = json::array();
  for (const auto& p : run.outputs()) outputs.push_back((run.dir() / p).string());
  const json manifest{{"command", run.command()},
                      {"flags", flags},
                      {"seed", seed},
                      {"version", kVersion},
                      {"timestamp", utc_stamp(run.started(), "%Y-%m-%dT%H:%M:%SZ")},
                      {"workers", worker_count()},
                      {"run_dir", run.dir().string()},
                      {"outputs", outputs}};
  std::ofstream f(run.dir() / "manifest.json");
  f << manifest.dump(2) << "\n";
}

}  // namespace

std::vector<std::string> replay_args(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw UsageError("cannot read manifest " + manifest.string());
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(std::string("manifest: ") + e.what());
  }
  if (!m.contains("command") || !m.contains("flags")) throw UsageError("manifest: expected command and flags");
  std::vector<std::string> args{m["command"].get<std::string>()};
  for (const auto& [name, value] : m["flags"].items()) {
    if (name == "action") {
      args.push_back(value.get<std::string>());
    } else if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + name);
    } else if (value.is_array()) {
      if (value.empty()) continue;
      args.push_back("--" + name);
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + v.get<std::string>();
      args.push_back(joined);
    } else {
      args.push_back("--" + name);
      args.push_back(value.get<std::string>());
    }
  }
  return args;
}

RunResult run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  // `replay <manifest> [--out DIR]` re-runs a recorded command.
  if (!args.empty() && args[0] == "replay") {
    try {
      if (args.size() < 2) throw UsageError("replay: expected a manifest path");
      std::vector<std::string> again = replay_args(args[1]);
      if (args.size() == 3 || args.size() > 4 || (args.size() == 4 && args[2] != "--out"))
        throw UsageError("replay: only --out DIR may follow the manifest");
      if (args.size() == 4) {
        const auto it = std::find(again.begin(), again.end(), "--out");
        if (it != again.end()) again.erase(it, it + 2);
        again.push_back("--out");
        again.push_back(args[3]);
      }
      return run(again, out, err);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << "\n";
      return {1, {}};
    }
  }

  CLI::App app{"Colored-field model of multipartite entanglement", "colorent"};
  app.set_version_flag("--version", kVersion);
  Options o;
  std::map<std::string, Command> cmds;
  try {
    cmds = build(app, o);
    args = merge_config(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return {code == 0 ? 0 : 1, {}};
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return {1, {}};
  }

  for (auto& [name, cmd] : cmds) {
    if (!cmd.app->parsed()) continue;
    const std::uint64_t seed = o.seed ? *o.seed : fresh_seed();
    o.seed = seed;
    Run r(name, o.out, out);
    try {
      cmd.handler(o, r);
      write_manifest(r, cmd.app, seed);
      out << "wrote " << r.dir().string() << "\n";
      return {0, r.dir()};
    } catch (const UsageError& e) {
      err << "error: " << e.what() << "\n" << cmd.app->help();
      return {1, {}};
    } catch (const InvalidStateError& e) {
      err << "error: " << e.what() << "\n";
      return {1, {}};
    } catch (const NumericalError& e) {
      err << "numerical failure: " << e.what() << "\n";
      return {2, {}};
    } catch (const fs::filesystem_error& e) {
      err << "error: " << e.what() << "\n";
      return {1, {}};
    } catch (const std::exception& e) {
      err << "numerical failure: " << e.what() << "\n";
      return {2, {}};
    }
  }
  err << app.help();
  return {1, {}};
}

int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  return run(std::move(args), out, err).exit_code;
}

}  // namespace colorent::cli
