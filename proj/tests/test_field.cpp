#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "colorent/error.hpp"
#include "colorent/field.hpp"
#include "colorent/state_io.hpp"

using namespace colorent;

namespace {

ComplexState random_complex(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<std::complex<double>> z(std::size_t{1} << n);
  double norm = 0.0;
  for (auto& a : z) {
    a = {g(rng), g(rng)};
    norm += std::norm(a);
  }
  for (auto& a : z) a /= std::sqrt(norm);
  return ComplexState(n, std::move(z));
}

// Φ_k = φ/√N_A on the N_A configurations with k_Ā = (k_A, 0, ..., 0).
ColoredState canonical_minimizer(int n, std::uint32_t subset, std::span<const double> color) {
  const std::uint32_t full = (std::uint32_t{1} << n) - 1, rest = full & ~subset;
  const int nc = static_cast<int>(color.size());
  std::vector<double> phi((std::size_t{1} << n) * color.size(), 0.0);
  const std::uint32_t na = std::uint32_t{1} << std::popcount(subset);
  for (std::uint32_t a = 0; a < na; ++a) {
    const std::uint32_t k = deposit_bits(a, subset) | deposit_bits(a, rest);
    for (int mu = 0; mu < nc; ++mu) phi[k * color.size() + mu] = color[mu] / std::sqrt(double(na));
  }
  return ColoredState::normalized(n, nc, std::move(phi));
}

}  // namespace

TEST_SUITE("field") {

TEST_CASE("state invariants") {
  CHECK_THROWS_AS(ColoredState(2, 1, {1.0, 0.0, 0.0}), UsageError);
  CHECK_THROWS_AS(ColoredState(2, 1, {1.0, 1.0, 0.0, 0.0}), InvalidStateError);
  CHECK_THROWS_AS(ColoredState(2, 1, {NAN, 0.0, 0.0, 0.0}), InvalidStateError);
  CHECK_THROWS_AS(ColoredState::normalized(2, 1, {0.0, 0.0, 0.0, 0.0}), InvalidStateError);
  CHECK_NOTHROW(ColoredState(2, 1, {1.0 + 1e-13, 0.0, 0.0, 0.0}));
  CHECK(random_state(3, 4, 9) == random_state(3, 4, 9));
  CHECK(!(random_state(3, 4, 9) == random_state(3, 4, 10)));
  CHECK(std::abs(random_state(5, 3, 1).norm_squared() - 1.0) < 1e-12);
}

TEST_CASE("single-configuration state sits at N_c/2") {
  for (int n = 2; n <= 5; ++n) {
    const CouplingContext ctx(n);
    for (int nc : {1, 2, 3, 5}) {
      std::vector<double> color(static_cast<std::size_t>(nc), 1.0);
      const ColoredState s = ColoredState::single_configuration(n, ctx.dim() - 1, color);
      CHECK(energy(ctx, s).total == doctest::Approx(nc / 2.0).epsilon(1e-14));
      CHECK(energy_bruteforce(ctx, s) == doctest::Approx(nc / 2.0).epsilon(1e-14));
      const auto t = project_tangent(s.values(), gradient(ctx, s));
      double along = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) along += t[i] * s.values()[i];
      CHECK(std::abs(along) < 1e-14);
    }
  }
}

TEST_CASE("energy, brute force and partial-trace purity agree") {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 5; ++n) {
    const CouplingContext ctx(n);
    for (int trial = 0; trial < 25; ++trial) {
      const ComplexState z = random_complex(n, rng);
      const ColoredState s = complex_to_colored(z);
      const PurityReport r = energy(ctx, s);
      double avg = 0.0;
      for (std::size_t b = 0; b < r.bipartitions.size(); ++b) {
        const double p = purity_complex(z, r.bipartitions[b].mask);
        CHECK(std::abs(r.per_bipartition[b] - p) < 1e-10);
        CHECK(std::abs(purity_bipartition(ctx, s, r.bipartitions[b].mask) - p) < 1e-10);
        CHECK(std::abs(purity_complex(z, r.bipartitions[b].complement) - p) < 1e-12);
        avg += p;
      }
      avg /= static_cast<double>(r.bipartitions.size());
      CHECK(std::abs(r.total - avg) < 1e-10);
      CHECK(std::abs(energy_bruteforce(ctx, s) - r.total) < 1e-10);
    }
  }
}

TEST_CASE("energy and brute force agree for other color counts") {
  for (int n = 2; n <= 5; ++n) {
    const CouplingContext ctx(n);
    for (int nc : {1, 3, 5}) {
      const ColoredState s = random_state(n, nc, static_cast<std::uint64_t>(10 * n + nc));
      CHECK(std::abs(energy(ctx, s).total - energy_bruteforce(ctx, s)) < 1e-10);
    }
  }
  CHECK_THROWS_AS(energy_bruteforce(CouplingContext(7), random_state(7, 1, 1)), UsageError);
}

TEST_CASE("product and maximally entangled qubit states") {
  const int n = 4;
  std::vector<std::complex<double>> z(16, 0.0);
  // (|0⟩+|1⟩)^⊗4 / 4
  for (auto& a : z) a = 0.25;
  const ComplexState product(n, z);
  for (const auto& b : balanced_bipartitions(n)) CHECK(purity_complex(product, b.mask) == doctest::Approx(1.0));

  // Bell pairs across qubits (0,2) and (1,3): maximal for A = {0,1}.
  std::vector<std::complex<double>> bell(16, 0.0);
  for (std::uint32_t a = 0; a < 4; ++a) bell[deposit_bits(a, 0b0011) | deposit_bits(a, 0b1100)] = 0.5;
  const ComplexState me(n, bell);
  CHECK(purity_complex(me, 0b0011) == doctest::Approx(0.25).epsilon(1e-14));

  // GHZ: every bipartition has purity 1/2.
  std::vector<std::complex<double>> ghz(16, 0.0);
  ghz[0] = ghz[15] = 1.0 / std::sqrt(2.0);
  const ColoredState g = complex_to_colored(ComplexState(n, ghz));
  CHECK(energy(CouplingContext(n), g).total == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("canonical minimizer reaches N_c/(2N_A) on its bipartition") {
  for (int n : {2, 3, 4, 5, 6}) {
    const CouplingContext ctx(n);
    for (int nc : {1, 2, 3}) {
      std::vector<double> color(static_cast<std::size_t>(nc));
      for (int mu = 0; mu < nc; ++mu) color[mu] = 1.0 + mu;
      for (const auto& b : ctx.bipartitions()) {
        const ColoredState s = canonical_minimizer(n, b.mask, color);
        CHECK(std::abs(purity_bipartition(ctx, s, b.mask) - nc / (2.0 * ctx.dim_a())) < 1e-12);
      }
    }
  }
}

TEST_CASE("invariances and bounds") {
  std::mt19937_64 rng(8);
  for (int n = 2; n <= 6; ++n) {
    const CouplingContext ctx(n);
    for (int nc : {1, 2, 4}) {
      const ColoredState s = random_state(n, nc, rng);
      const double h = energy(ctx, s).total;
      CHECK(h >= nc / (2.0 * ctx.dim_a()) - 1e-10);
      CHECK(h <= nc / 2.0 + 1e-10);

      // Global rotation of colors: Gram-Schmidt on a random matrix.
      std::normal_distribution<double> g;
      std::vector<std::vector<double>> q(nc, std::vector<double>(nc));
      for (int i = 0; i < nc; ++i) {
        for (double& v : q[i]) v = g(rng);
        for (int j = 0; j < i; ++j) {
          double d = 0.0;
          for (int m = 0; m < nc; ++m) d += q[i][m] * q[j][m];
          for (int m = 0; m < nc; ++m) q[i][m] -= d * q[j][m];
        }
        double nn = 0.0;
        for (double v : q[i]) nn += v * v;
        for (double& v : q[i]) v /= std::sqrt(nn);
      }
      std::vector<double> rotated(s.size());
      for (std::uint32_t k = 0; k < s.dim(); ++k)
        for (int i = 0; i < nc; ++i) {
          double acc = 0.0;
          for (int m = 0; m < nc; ++m) acc += q[i][m] * s.at(k, m);
          rotated[k * nc + i] = acc;
        }
      CHECK(std::abs(energy(ctx, ColoredState(n, nc, rotated, 1e-10)).total - h) < 1e-10);

      const std::uint32_t m = static_cast<std::uint32_t>(rng() % s.dim());
      std::vector<double> shifted(s.size());
      for (std::uint32_t k = 0; k < s.dim(); ++k)
        for (int mu = 0; mu < nc; ++mu) shifted[(k ^ m) * nc + mu] = s.at(k, mu);
      CHECK(std::abs(energy(ctx, ColoredState(n, nc, shifted)).total - h) < 1e-12);

      if (n % 2 == 0)
        for (const auto& b : ctx.bipartitions())
          CHECK(std::abs(purity_bipartition(ctx, s, b.mask) - purity_bipartition(ctx, s, b.complement)) < 1e-12);
    }
  }
  const CouplingContext ctx(4);
  CHECK_THROWS_AS(purity_bipartition(ctx, random_state(4, 2, 1), 0b0111), UsageError);
  CHECK_THROWS_AS(energy(ctx, random_state(3, 2, 1)), UsageError);
}

TEST_CASE("gradient against central differences") {
  std::mt19937_64 rng(21);
  int states = 0;
  for (int n = 2; n <= 5; ++n)
    for (int nc : {1, 2, 3, 5}) {
      if (++states > 20) break;
      const CouplingContext ctx(n);
      const ColoredState s = random_state(n, nc, rng);
      const auto g = gradient(ctx, s);
      std::vector<double> phi(s.values().begin(), s.values().end());
      double num2 = 0.0, err2 = 0.0;
      const double h = 1e-5;
      for (std::size_t i = 0; i < phi.size(); ++i) {
        const double keep = phi[i];
        phi[i] = keep + h;
        const double up = quartic_energy(ctx, nc, phi);
        phi[i] = keep - h;
        const double down = quartic_energy(ctx, nc, phi);
        phi[i] = keep;
        const double fd = (up - down) / (2.0 * h);
        err2 += (fd - g[i]) * (fd - g[i]);
        num2 += g[i] * g[i];
      }
      CHECK(std::sqrt(err2 / num2) < 1e-6);

      // Degree-4 homogeneity of the unconstrained form.
      std::vector<double> scaled(phi);
      for (double& v : scaled) v *= 1.7;
      std::vector<double> gs(phi.size());
      quartic_energy_and_gradient(ctx, nc, scaled, gs);
      for (std::size_t i = 0; i < phi.size(); ++i) CHECK(gs[i] == doctest::Approx(1.7 * 1.7 * 1.7 * g[i]).epsilon(1e-10));
    }
}

TEST_CASE("state files round-trip") {
  const ColoredState s = random_state(3, 2, 4);
  CHECK(state_from_json(state_to_json(s)) == s);
  std::stringstream csv;
  write_state_csv(csv, s);
  CHECK(read_state_csv(csv, 3) == s);
  std::stringstream again;
  write_state_csv(again, s);
  CHECK(read_state_csv(again, -1) == s);
  CHECK_THROWS_AS(state_from_json(R"({"n": 1, "n_colors": 1, "phi": [[1.0], [1.0]]})"), InvalidStateError);
  CHECK_THROWS_AS(state_from_json("{"), UsageError);
}

}  // TEST_SUITE
