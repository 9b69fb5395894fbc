#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "maxstable/errors.hpp"
#include "maxstable/lattice.hpp"

namespace maxstable {

struct QuadratureOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-12;
  // Target width of the coarsest cells. Cell edges fall on multiples of it
  // when the box edges do, which keeps box-shaped integrands exact.
  double base_cell = 0.25;
  std::size_t max_evaluations = 30'000'000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int levels = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

// Midpoint sum of f over an N_0 * 3^level grid, skipping points already
// present at the previous level (all indices == 1 mod 3) when `only_new`.
template <class F>
double midpoint_sum(const F& f, int dim, const std::array<double, kMaxDim>& lower,
                    const std::array<double, kMaxDim>& width, const std::array<long long, kMaxDim>& cells,
                    bool only_new, std::size_t& evals) {
  std::array<long long, kMaxDim> idx{};
  std::array<double, kMaxDim> x{};
  double sum = 0.0;
  for (;;) {
    bool old_point = only_new;
    for (int i = 0; i < dim && old_point; ++i) old_point = idx[static_cast<std::size_t>(i)] % 3 == 1;
    if (!old_point) {
      for (int i = 0; i < dim; ++i) {
        const auto a = static_cast<std::size_t>(i);
        x[a] = lower[a] + (static_cast<double>(idx[a]) + 0.5) * width[a];
      }
      sum += f(std::span<const double>(x.data(), static_cast<std::size_t>(dim)));
      ++evals;
    }
    int i = dim - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == cells[static_cast<std::size_t>(i)] - 1) {
      idx[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
  }
  return sum;
}

}  // namespace detail

// Integral of f over the box [lower, upper] by nested midpoint rules (cells
// split in three per level, so every old node is reused) with Richardson
// extrapolation for the h^2 error term. Stops once successive extrapolated
// values agree to rel_tol. When the evaluation budget runs out first the
// best value is returned with a tenfold error estimate and converged=false.
template <class F>
QuadratureResult integrate_box(const F& f, std::span<const double> lower, std::span<const double> upper,
                               const QuadratureOptions& opt = {}) {
  const int dim = static_cast<int>(lower.size());
  if (dim < 1 || dim > kMaxDim || upper.size() != lower.size()) throw ContractError("integrate_box: bad dimension");
  std::array<double, kMaxDim> lo{}, width{};
  std::array<long long, kMaxDim> cells{};
  double cell_volume = 1.0;
  std::size_t points = 1;
  for (int i = 0; i < dim; ++i) {
    const auto a = static_cast<std::size_t>(i);
    const double len = upper[a] - lower[a];
    if (!(len > 0.0)) throw ContractError("integrate_box: empty box");
    cells[a] = std::max<long long>(1, static_cast<long long>(std::ceil(len / opt.base_cell - 1e-9)));
    lo[a] = lower[a];
    width[a] = len / static_cast<double>(cells[a]);
    cell_volume *= width[a];
    points *= static_cast<std::size_t>(cells[a]);
  }
  QuadratureResult res;
  double sum = detail::midpoint_sum(f, dim, lo, width, cells, false, res.evaluations);
  double prev_plain = sum * cell_volume;
  double prev_rich = prev_plain;
  bool have_rich = false;
  res.value = prev_plain;
  res.error = std::abs(prev_plain);
  for (int level = 1;; ++level) {
    std::size_t next_points = points;
    for (int i = 0; i < dim; ++i) next_points *= 3;
    if (res.evaluations + next_points > opt.max_evaluations) {
      res.error *= 10.0;
      res.converged = false;
      return res;
    }
    for (int i = 0; i < dim; ++i) {
      const auto a = static_cast<std::size_t>(i);
      cells[a] *= 3;
      width[a] /= 3.0;
    }
    cell_volume /= std::pow(3.0, dim);
    points = next_points;
    sum += detail::midpoint_sum(f, dim, lo, width, cells, true, res.evaluations);
    const double plain = sum * cell_volume;
    const double rich = plain + (plain - prev_plain) / 8.0;
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(rich));
    res.levels = level;
    res.value = rich;
    const double diff_plain = std::abs(plain - prev_plain);
    res.error = have_rich ? std::abs(rich - prev_rich) : diff_plain;
    // Identical consecutive rules mean the integrand is resolved exactly
    // (piecewise constant on aligned cells).
    if (diff_plain <= tol * 1e-3 || (have_rich && res.error <= tol)) {
      res.converged = true;
      return res;
    }
    prev_plain = plain;
    prev_rich = rich;
    have_rich = true;
  }
}

}  // namespace maxstable
