#include "colorent/coupling.hpp"

#include <random>
#include <string>

#include "colorent/rng.hpp"

namespace colorent {

std::vector<Bipartition> balanced_bipartitions(int n) {
  if (n < 2 || n > kMaxQubits) throw UsageError("balanced_bipartitions: n must lie in [2, 24]");
  const int size = n / 2;
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  std::vector<Bipartition> out;
  out.reserve(static_cast<std::size_t>(binomial(n, size)));

  std::vector<int> pick(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
  while (true) {
    std::uint32_t mask = 0;
    for (int q : pick) mask |= std::uint32_t{1} << q;
    out.push_back({mask, full & ~mask});
    int i = size - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - size + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < size; ++j)
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

CouplingContext::CouplingContext(int n)
    : n_(n), n_a_(n / 2), lazy_(std::make_shared<Lazy>()) {
  if (n < 2 || n > kMaxQubits) throw UsageError("CouplingContext: n must lie in [2, 24]");

  const std::int64_t choose = binomial(n_, n_a_);
  denominator_ = 2 * choose;
  row_sum_ = static_cast<std::int64_t>(dim_a()) + static_cast<std::int64_t>(dim_abar()) - 1;

  const std::size_t cells = static_cast<std::size_t>(n_ + 1) * static_cast<std::size_t>(n_ + 1);
  ghat_.resize(cells);
  ghat_value_.resize(cells);
  ghat_num_.resize(cells);
  for (int s = 0; s <= n_; ++s) {
    for (int t = 0; t <= n_; ++t) {
      const int rest = n_ - s - t;
      const std::int64_t num = binomial(rest, n_a_ - s) + binomial(rest, n_a_ - t);
      const std::size_t i = index(s, t);
      ghat_num_[i] = num;
      ghat_[i] = Rational(num, denominator_);
      ghat_value_[i] = to_double(ghat_[i]);
      if (num < 0 || num > denominator_) throw NumericalError("CouplingContext: ĝ outside [0, 1]");
    }
  }
  if (ghat_num_[index(0, 0)] != denominator_) throw NumericalError("CouplingContext: ĝ(0,0) != 1");

  bipartitions_ = balanced_bipartitions(n_);
  if (static_cast<std::int64_t>(bipartitions_.size()) != choose)
    throw NumericalError("CouplingContext: bipartition count mismatch");

  Rng rng(static_cast<std::uint64_t>(n_));
  std::uniform_int_distribution<std::uint32_t> pick(0, dim() - 1);
  const std::uint32_t k = pick(rng);
  if (delta_tilde_row_sum_at(BitString(k, n_)) != Rational(row_sum_))
    throw NumericalError("CouplingContext: Δ̃ row sum differs from N_A + N_Abar - 1");
}

const Rational& CouplingContext::g_hat(int s, int t) const {
  if (s < 0 || t < 0 || s > n_ || t > n_) throw UsageError("g_hat: arguments must lie in [0, n]");
  return ghat_[index(s, t)];
}

namespace {

void check_width(const CouplingContext& ctx, std::initializer_list<const BitString*> args) {
  for (const BitString* b : args)
    if (b->size() != ctx.n()) throw UsageError("coupling: bit string width differs from n");
}

}  // namespace

Rational CouplingContext::delta(const BitString& k, const BitString& kp, const BitString& l,
                                const BitString& lp) const {
  check_width(*this, {&k, &kp, &l, &lp});
  return Rational(delta_numerator(k.bits(), kp.bits(), l.bits(), lp.bits()), denominator_);
}

Rational CouplingContext::delta_tilde(const BitString& k, const BitString& kp, const BitString& l,
                                      const BitString& lp) const {
  check_width(*this, {&k, &kp, &l, &lp});
  return Rational(delta_tilde_numerator(k.bits(), kp.bits(), l.bits(), lp.bits()), denominator_);
}

Rational CouplingContext::delta_tilde_row_sum_at(const BitString& k) const {
  check_width(*this, {&k});
  std::int64_t sum = 0;
  const std::uint32_t kb = k.bits();
  for (std::uint32_t l = 0; l < dim(); ++l) sum += delta_tilde_numerator(kb, l, kb, l);
  return Rational(sum, denominator_);
}

std::span<const Contraction> CouplingContext::contractions() const {
  if (n_ > kMaxDenseQubits)
    throw UsageError("contractions: n = " + std::to_string(n_) + " exceeds the dense limit of " +
                     std::to_string(kMaxDenseQubits) + " qubits");
  std::call_once(lazy_->once, [this] {
    const bool even = n_ % 2 == 0;
    const double weight = 1.0 / static_cast<double>(bipartitions_.size()) / (even ? 1.0 : 2.0);
    auto build = [&](std::size_t b, std::uint32_t summed_mask, std::uint32_t kept_mask) {
      Contraction c;
      c.bipartition = b;
      c.summed_mask = summed_mask;
      c.kept_mask = kept_mask;
      c.summed_dim = std::uint32_t{1} << std::popcount(summed_mask);
      c.kept_dim = std::uint32_t{1} << std::popcount(kept_mask);
      c.weight = weight;
      c.config.resize(dim());
      c.summed.resize(dim());
      c.kept.resize(dim());
      for (std::uint32_t k = 0; k < dim(); ++k) {
        const std::uint32_t s = extract_bits(k, summed_mask);
        const std::uint32_t r = extract_bits(k, kept_mask);
        c.summed[k] = s;
        c.kept[k] = r;
        c.config[s * c.kept_dim + r] = k;
      }
      lazy_->contractions.push_back(std::move(c));
    };
    for (std::size_t b = 0; b < bipartitions_.size(); ++b) {
      build(b, bipartitions_[b].mask, bipartitions_[b].complement);
      if (!even) build(b, bipartitions_[b].complement, bipartitions_[b].mask);
    }
  });
  return lazy_->contractions;
}

}  // namespace colorent
