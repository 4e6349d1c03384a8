#include <doctest.h>

#include <cmath>
#include <vector>

#include "colorent/error.hpp"
#include "colorent/largenc.hpp"
#include "colorent/sampler.hpp"

using namespace colorent;

TEST_SUITE("sampler") {

TEST_CASE("incremental chain follows the from-scratch Metropolis route") {
  for (auto [n, nc] : {std::pair{3, 3}, std::pair{4, 2}, std::pair{2, 1}}) {
    CAPTURE(n);
    CAPTURE(nc);
    const CouplingContext ctx(n);
    const ColoredState start = random_state(n, nc, 11);
    MetropolisChain chain(ctx, start, 99);
    ColoredState naive = start;
    Rng rng(99);
    const double beta = 2.0 * beta0(n);
    int accepted = 0;
    for (int i = 0; i < 3000; ++i) {
      const bool a = chain.step(beta, 0.4);
      const bool b = metropolis_step(ctx, naive, beta, 0.4, rng);
      REQUIRE(a == b);
      accepted += a;
    }
    CHECK(accepted > 100);
    CHECK(accepted < 3000);
    for (std::size_t i = 0; i < naive.size(); ++i) CHECK(chain.state().values()[i] == naive.values()[i]);
    CHECK(chain.energy() == doctest::Approx(quartic_energy(ctx, nc, naive.values())).epsilon(1e-12));
  }
}

TEST_CASE("tracked energy survives a refresh") {
  const CouplingContext ctx(5);
  MetropolisChain chain(ctx, random_state(5, 3, 4), 5);
  for (int i = 0; i < 20; ++i) chain.sweep(beta0(5), 0.3);
  const double tracked = chain.energy();
  chain.refresh();
  CHECK(std::abs(tracked - chain.energy()) < 1e-12);
  CHECK(std::abs(chain.energy() - energy(ctx, chain.state()).total) < 1e-12);
}

TEST_CASE("β = 0 accepts every proposal") {
  const CouplingContext ctx(3);
  MetropolisChain chain(ctx, random_state(3, 2, 1), 2);
  for (int i = 0; i < 10; ++i) CHECK(chain.sweep(0.0, 1.0) == 1.0);
}

TEST_CASE("large β only accepts downhill moves") {
  const CouplingContext ctx(3);
  MetropolisChain chain(ctx, random_state(3, 2, 1), 2);
  double last = chain.energy();
  for (int i = 0; i < 2000; ++i) {
    chain.step(1e300, 0.3);
    CHECK(chain.energy() <= last + 1e-15);
    last = chain.energy();
  }
}

TEST_CASE("rotations conserve the norm over 10^6 steps") {
  const CouplingContext ctx(2);
  ColoredState state = random_state(2, 1, 3);
  MetropolisChain chain(ctx, state, 8);
  for (int i = 0; i < 1000000; ++i) chain.step(3.0, 1.0);
  CHECK(std::abs(chain.state().norm_squared() - 1.0) < 1e-12);
}

TEST_CASE("detailed balance against sphere importance weights") {
  // n = 2, N_c = 1: Φ is a point on S^3, small enough for direct reweighting.
  const CouplingContext ctx(2);
  const double beta = 20.0;

  Rng rng(17);
  double sw = 0.0, swh = 0.0, sw2 = 0.0, sw2h = 0.0, sw2h2 = 0.0;
  const int draws = 400000;
  for (int i = 0; i < draws; ++i) {
    const ColoredState s = random_state(2, 1, rng);
    const double h = quartic_energy(ctx, 1, s.values());
    const double w = std::exp(-beta * (h - 0.25));
    sw += w;
    swh += w * h;
    sw2 += w * w;
    sw2h += w * w * h;
    sw2h2 += w * w * h * h;
  }
  const double ref = swh / sw;
  // Delta-method error of the ratio estimator.
  const double var = (sw2h2 - 2.0 * ref * sw2h + ref * ref * sw2) / (sw * sw);
  const double ref_err = std::sqrt(var);

  MCConfig cfg;
  cfg.n = 2;
  cfg.n_colors = 1;
  cfg.seed = 23;
  const ChainRecord rec = run_chain(ctx, cfg, Schedule::fixed(beta, 200000));
  const Estimate mc = rec.legs[0].energy;
  CAPTURE(ref);
  CAPTURE(mc.mean);
  CHECK(std::abs(mc.mean - ref) < 3.0 * std::hypot(mc.stderr_, ref_err));
  CHECK(mc.mean < 0.4);
}

TEST_CASE("β = 0 leg reproduces the first cumulant") {
  const CouplingContext ctx(4);
  MCConfig cfg;
  cfg.n = 4;
  cfg.n_colors = 2;
  cfg.seed = 5;
  const ChainRecord rec = run_chain(ctx, cfg, Schedule::fixed(0.0, 4000));
  const Estimate e = rec.legs[0].energy;
  CHECK(std::abs(e.mean - 8.0 / 17.0) < 3.0 * e.stderr_);
  CHECK(rec.legs[0].acceptance == 1.0);
}

TEST_CASE("negative β pushes the energy toward N_c/2") {
  const CouplingContext ctx(4);
  MCConfig cfg;
  cfg.n = 4;
  cfg.n_colors = 2;
  cfg.seed = 6;
  const double b0 = beta0(4);
  const ChainRecord rec = run_chain(ctx, cfg, Schedule::anneal(std::vector<double>{0.0, -0.5 * b0, -2.0 * b0}, 600));
  CHECK(rec.legs[1].energy.mean > rec.legs[0].energy.mean);
  CHECK(rec.legs[2].energy.mean > rec.legs[1].energy.mean);
  CHECK(rec.legs[2].energy.mean < 1.0 + 1e-12);
}

TEST_CASE("identical inputs give bit-identical records") {
  const CouplingContext ctx(3);
  MCConfig cfg;
  cfg.n = 3;
  cfg.n_colors = 4;
  cfg.seed = 77;
  cfg.record_snapshots = true;
  const std::vector<double> betas{0.0, 10.0, 40.0};
  const Schedule sched = Schedule::anneal(betas, 50);
  const ChainRecord a = run_chain(ctx, cfg, sched);
  const ChainRecord b = run_chain(ctx, cfg, sched);
  REQUIRE(a.legs.size() == b.legs.size());
  for (std::size_t i = 0; i < a.legs.size(); ++i) {
    CHECK(a.legs[i].energy.mean == b.legs[i].energy.mean);
    CHECK(a.legs[i].energy.stderr_ == b.legs[i].energy.stderr_);
    CHECK(a.legs[i].theta_max == b.legs[i].theta_max);
    CHECK(a.snapshots[i] == b.snapshots[i]);
  }
  cfg.seed = 78;
  CHECK(run_chain(ctx, cfg, sched).legs[0].energy.mean != a.legs[0].energy.mean);
}

TEST_CASE("θ_max adaptation lands in the target window") {
  const CouplingContext ctx(4);
  MCConfig cfg;
  cfg.n = 4;
  cfg.n_colors = 3;
  cfg.seed = 9;
  cfg.theta_max = 3.0;
  const ChainRecord rec = run_chain(ctx, cfg, Schedule::fixed(3.0 * beta0(4), 600));
  CHECK(rec.legs[0].theta_max < 3.0);
  CHECK(rec.legs[0].acceptance > 0.2);
  CHECK(rec.legs[0].acceptance < 0.7);
}

TEST_CASE("schedules validate their legs") {
  CHECK_THROWS_AS(Schedule::fixed(1.0, 0), UsageError);
  CHECK_THROWS_AS(Schedule(ScheduleKind::hysteresis_loop, {{1.0, 5}, {2.0, 5}}), UsageError);
  CHECK_NOTHROW(Schedule(ScheduleKind::hysteresis_loop, {{1.0, 5}, {2.0, 5}, {1.0, 5}}));

  const Schedule loop = Schedule::hysteresis_loop(130.0, 4.0, 300, 900);
  const auto legs = loop.legs();
  REQUIRE(legs.size() == 68);
  CHECK(legs.front().beta == 130.0);
  CHECK(legs.front().mc_steps == 900);
  CHECK(legs[32].beta == 2.0);
  CHECK(legs[33].beta == 0.0);
  CHECK(legs[34].beta == 0.0);
  CHECK(legs.back().beta == 130.0);
  CHECK(loop.kind() == ScheduleKind::hysteresis_loop);

  CHECK(Schedule::anneal(std::vector<double>{3.0, 1.0}, 5).kind() == ScheduleKind::anneal_down);
  CHECK(Schedule::quench(0.0, 50.0, 10, 10).legs().size() == 2);

  const auto grid = beta_tilde_grid(0.1, 3.0, 1.0, 10.0);
  CHECK(grid.size() == 38);
  CHECK(grid[30] == doctest::Approx(3.0));
  CHECK(grid.back() == doctest::Approx(10.0));

  MCConfig bad;
  bad.theta_max = 4.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("hysteresis branches cover the same grid") {
  const CouplingContext ctx(3);
  MCConfig cfg;
  cfg.n = 3;
  cfg.n_colors = 2;
  cfg.seed = 4;
  const auto h = hysteresis(ctx, cfg, 20.0, 5.0, 20);
  REQUIRE(h.heating.legs.size() == 5);
  REQUIRE(h.cooling.legs.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(h.heating.legs[i].beta == h.cooling.legs[4 - i].beta);
  CHECK(h.heating.legs.front().beta == 20.0);
  CHECK(h.cooling.legs.front().beta == 0.0);
}

TEST_CASE("replica overlap") {
  const CouplingContext ctx(3);
  ReplicaPair same(ctx, 2, 5, 5);
  for (int i = 0; i < 5; ++i) {
    same.first().sweep(10.0, 0.5);
    same.second().sweep(10.0, 0.5);
  }
  CHECK(std::abs(same.overlap() * same.overlap() - 1.0) < 1e-12);

  ReplicaPair pair(ctx, 2, 5, 6);
  OverlapOptions opt;
  opt.measurements = 400;
  opt.cadence = 2;
  opt.burn_in = 10;
  const OverlapEstimate o = overlap(ctx, pair, 0.0, opt);
  CHECK(std::abs(o.rescaled_q2.mean - 1.0) < 3.0 * o.rescaled_q2.stderr_);

  // Several pairs: deterministic, and their spread sets the error.
  opt.measurements = 40;
  const std::vector<double> betas{0.0, 20.0};
  const auto one = overlap_scan(ctx, 2, betas, 3, opt);
  opt.pairs = 6;
  const auto six = overlap_scan(ctx, 2, betas, 3, opt);
  REQUIRE(six.size() == 2);
  CHECK(six[0].rescaled_q2.mean != one[0].rescaled_q2.mean);
  CHECK(std::abs(six[0].rescaled_q2.mean - 1.0) < 3.0 * six[0].rescaled_q2.stderr_);
  CHECK(six[1].rescaled_q2.stderr_ > 0.0);
  CHECK(overlap_scan(ctx, 2, betas, 3, opt)[1].rescaled_q2.mean == six[1].rescaled_q2.mean);
  opt.pairs = 0;
  CHECK_THROWS_AS(overlap_scan(ctx, 2, betas, 3, opt), UsageError);
}

TEST_CASE("ground states") {
  SUBCASE("n = 4, N_c = 2 is frustrated at 1/3") {
    const CouplingContext ctx(4);
    const MinimumResult m = find_minimum(ctx, 2, 6, 7);
    CHECK(m.rescaled == doctest::Approx(1.0 / 3.0).epsilon(0.002));
    CHECK(m.gradient_norm < 1e-8);
    CHECK(m.energy >= lower_bound(4, 2) - 1e-9);
    CHECK(std::abs(energy(ctx, m.argmin).total - m.energy) < 1e-12);
    CHECK(m.restart_energies.size() == 6);
  }
  SUBCASE("n = 3 reaches the bound") {
    const CouplingContext ctx(3);
    for (int nc : {1, 2, 3}) {
      const MinimumResult m = find_minimum(ctx, nc, 4, 3);
      CHECK(m.energy >= lower_bound(3, nc) - 1e-9);
      CHECK(m.energy == doctest::Approx(lower_bound(3, nc)).epsilon(1e-6));
    }
  }
  SUBCASE("scan follows the law (N_c + 2)/(6 N_c)") {
    const CouplingContext ctx(4);
    const std::vector<int> ncs{3, 4};
    const auto rows = frustration_scan(ctx, ncs, 6, 1);
    CHECK(rows[0].rescaled == doctest::Approx(5.0 / 18.0).epsilon(0.002));
    CHECK(rows[1].rescaled == doctest::Approx(0.25).epsilon(0.002));
    for (const auto& r : rows) CHECK(r.rescaled >= 0.25 - 1e-6);
  }
  CHECK_THROWS_AS(find_minimum(CouplingContext(3), 2, 0, 1), UsageError);
}

}  // TEST_SUITE
