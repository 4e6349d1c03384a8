#include "colorent/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "colorent/error.hpp"

namespace colorent {

Estimate mean_iid(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n == 0) throw UsageError("mean_iid: no samples");
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n))};
}

Estimate mean_blocked(std::span<const double> series) {
  if (series.empty()) throw UsageError("mean_blocked: empty series");
  std::vector<double> level(series.begin(), series.end());
  const Estimate base = mean_iid(level);
  if (level.size() < 32) return base;

  std::vector<double> errors;
  while (level.size() >= 16) {
    errors.push_back(mean_iid(level).stderr_);
    std::vector<double> next(level.size() / 2);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = 0.5 * (level[2 * i] + level[2 * i + 1]);
    level = std::move(next);
  }
  std::size_t blocks = series.size();
  for (std::size_t l = 0; l + 1 < errors.size(); ++l, blocks /= 2) {
    const double uncertainty = errors[l] / std::sqrt(2.0 * static_cast<double>(blocks - 1));
    if (errors[l + 1] <= errors[l] + uncertainty) return {base.mean, std::max(errors[l], errors[l + 1])};
  }
  return {base.mean, *std::max_element(errors.begin(), errors.end())};
}

// ============================================================================
// k-statistics
// ============================================================================
//
// k_r = Σ_π (-1)^{|π|-1} (|π|-1)! U(π), summing over set partitions π of r items,
// where U(a_1..a_j) is the U-statistic of Π μ'_{a_i} (average over distinct index
// tuples). The sum over distinct tuples is expanded into power sums by Möbius
// inversion over set partitions of the j tuple positions.

namespace {

using Partition = std::vector<std::vector<int>>;

void enumerate_partitions(int items, const std::function<void(const Partition&)>& visit) {
  Partition current;
  std::function<void(int)> rec = [&](int next) {
    if (next == items) {
      visit(current);
      return;
    }
    // Index, not reference: the recursion below grows `current`.
    for (std::size_t b = 0; b < current.size(); ++b) {
      current[b].push_back(next);
      rec(next + 1);
      current[b].pop_back();
    }
    current.push_back({next});
    rec(next + 1);
    current.pop_back();
  };
  rec(0);
}

double signed_factorial(int blocks) {
  double f = 1.0;
  for (int i = 2; i < blocks; ++i) f *= i;
  return (blocks % 2 == 1) ? f : -f;
}

struct Term {
  double coefficient;
  int tuple_length;           // j: divides by the falling factorial (n)_j
  std::vector<int> exponents; // power sums multiplied together
};

std::vector<Term> kstat_terms(int order) {
  std::vector<Term> terms;
  enumerate_partitions(order, [&](const Partition& pi) {
    const double outer = signed_factorial(static_cast<int>(pi.size()));
    std::vector<int> sizes;
    for (const auto& b : pi) sizes.push_back(static_cast<int>(b.size()));
    const int j = static_cast<int>(sizes.size());
    enumerate_partitions(j, [&](const Partition& sigma) {
      double mu = 1.0;
      std::vector<int> exps;
      for (const auto& block : sigma) {
        mu *= signed_factorial(static_cast<int>(block.size()));
        int e = 0;
        for (int t : block) e += sizes[static_cast<std::size_t>(t)];
        exps.push_back(e);
      }
      terms.push_back({outer * mu, j, std::move(exps)});
    });
  });
  return terms;
}

/// Evaluate k_order from power sums s[e] = Σ x^e of `count` samples.
double kstat_from_sums(const std::vector<Term>& terms, std::span<const double> s, double count) {
  double total = 0.0;
  for (const Term& t : terms) {
    double falling = 1.0;
    for (int i = 0; i < t.tuple_length; ++i) falling *= (count - i);
    double prod = t.coefficient;
    for (int e : t.exponents) prod *= s[static_cast<std::size_t>(e)];
    total += prod / falling;
  }
  return total;
}

void accumulate(std::span<const double> xs, double shift, std::vector<double>& power) {
  for (double x : xs) {
    const double y = x - shift;
    double p = 1.0;
    for (double& s : power) {
      s += p;
      p *= y;
    }
  }
}

std::vector<double> evaluate(const std::vector<std::vector<Term>>& tables,
                             std::span<const double> power, double shift) {
  const double count = power[0];
  std::vector<double> out;
  out.push_back(shift + power[1] / count);
  for (std::size_t r = 2; r < tables.size(); ++r) out.push_back(kstat_from_sums(tables[r], power, count));
  return out;
}

std::vector<std::vector<Term>> tables_for(int max_order) {
  if (max_order < 1 || max_order > 8) throw UsageError("k_statistics: order must lie in [1, 8]");
  std::vector<std::vector<Term>> tables(static_cast<std::size_t>(max_order + 1));
  for (int r = 2; r <= max_order; ++r) tables[static_cast<std::size_t>(r)] = kstat_terms(r);
  return tables;
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

std::vector<double> k_statistics(std::span<const double> samples, int max_order) {
  const auto tables = tables_for(max_order);
  if (samples.size() <= static_cast<std::size_t>(max_order))
    throw UsageError("k_statistics: need more samples than the order");
  const double shift = mean_of(samples);
  std::vector<double> power(static_cast<std::size_t>(max_order + 1), 0.0);
  accumulate(samples, shift, power);
  return evaluate(tables, power, shift);
}

std::vector<Estimate> k_statistics_jackknife(std::span<const double> samples, int max_order,
                                             std::size_t blocks) {
  const auto tables = tables_for(max_order);
  const std::size_t n = samples.size();
  blocks = std::min(blocks, n);
  if (blocks < 2 || n / blocks <= static_cast<std::size_t>(max_order) ||
      n - n / blocks <= static_cast<std::size_t>(max_order))
    throw UsageError("k_statistics_jackknife: too few samples for the requested order");

  const double shift = mean_of(samples);
  const std::size_t width = static_cast<std::size_t>(max_order + 1);
  std::vector<double> total(width, 0.0);
  std::vector<std::vector<double>> per_block(blocks, std::vector<double>(width, 0.0));
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t lo = b * n / blocks, hi = (b + 1) * n / blocks;
    accumulate(samples.subspan(lo, hi - lo), shift, per_block[b]);
    for (std::size_t e = 0; e < width; ++e) total[e] += per_block[b][e];
  }
  const auto full = evaluate(tables, total, shift);

  std::vector<std::vector<double>> leave_out;
  std::vector<double> rest(width);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t e = 0; e < width; ++e) rest[e] = total[e] - per_block[b][e];
    leave_out.push_back(evaluate(tables, rest, shift));
  }
  std::vector<Estimate> out;
  const double nb = static_cast<double>(blocks);
  for (std::size_t r = 0; r < full.size(); ++r) {
    double avg = 0.0;
    for (const auto& v : leave_out) avg += v[r];
    avg /= nb;
    double var = 0.0;
    for (const auto& v : leave_out) var += (v[r] - avg) * (v[r] - avg);
    out.push_back({full[r], std::sqrt(var * (nb - 1.0) / nb)});
  }
  return out;
}

}  // namespace colorent
