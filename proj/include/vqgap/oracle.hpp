#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "vqgap/qsim.hpp"
#include "vqgap/qubo.hpp"

namespace vqgap {

/// True iff every AV row sums to exactly 1 and no BS exceeds its capacity.
inline bool is_feasible(std::uint64_t state, const GapInstance& inst) {
  std::size_t col[kMaxVariables] = {0};
  std::size_t k = 0;
  for (std::size_t i = 0; i < inst.n_avs; ++i) {
    std::size_t row = 0;
    for (std::size_t j = 0; j < inst.n_bs; ++j, ++k) {
      if ((state >> k) & 1ULL) {
        ++row;
        ++col[j];
      }
    }
    if (row != 1) return false;
  }
  for (std::size_t j = 0; j < inst.n_bs; ++j)
    if (col[j] > inst.capacities[j]) return false;
  return true;
}

inline bool is_feasible(std::span<const std::uint8_t> bits, const GapInstance& inst) {
  if (bits.size() != inst.n_vars())
    throw std::invalid_argument("is_feasible: bit count must equal n_vars");
  return is_feasible(index_of_bits(bits), inst);
}

struct OracleResult {
  std::uint64_t best_state = 0;
  double best_energy = std::numeric_limits<double>::infinity();
  std::size_t n_ground_states = 0;
  std::optional<std::uint64_t> best_feasible_state;
  std::optional<double> best_feasible_z;

  Bits best_bits(std::size_t n_vars) const { return bits_of_index(best_state, n_vars); }
};

/// Exhaustive minimization over all 2^n bitstrings. Ties break towards the
/// lowest bitstring value; co-minimal states are counted within a 1e-9
/// relative band.
inline OracleResult brute_force_optimum(const GapInstance& inst) {
  const std::size_t n = inst.n_vars();
  if (n > kMaxVariables)
    throw std::length_error("brute_force_optimum: instance exceeds " +
                            std::to_string(kMaxVariables) + " variables");
  OracleResult res;
  double best_feasible_energy = std::numeric_limits<double>::infinity();
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t state = 0; state < count; ++state) {
    const double e = inst.energy_of_index(state);
    if (e < res.best_energy) {
      res.best_energy = e;
      res.best_state = state;
    }
    if (is_feasible(state, inst) && e < best_feasible_energy) {
      best_feasible_energy = e;
      res.best_feasible_state = state;
    }
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(res.best_energy));
  for (std::uint64_t state = 0; state < count; ++state)
    if (inst.energy_of_index(state) <= res.best_energy + tol) ++res.n_ground_states;
  if (res.best_feasible_state) {
    const auto a = decode_assignment(*res.best_feasible_state, inst.n_avs, inst.n_bs);
    res.best_feasible_z = objective_z(inst, a);
  }
  return res;
}

/// Exact alpha-tail conditional expectation of the energy distribution of a
/// state: outcomes sorted by energy, probability mass accumulated to exactly
/// alpha with the boundary atom split fractionally.
inline double exact_cvar(const Statevector& state, const GapInstance& inst, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::domain_error("exact_cvar: alpha must lie in (0, 1]");
  if (state.n_qubits != inst.n_vars())
    throw std::invalid_argument("exact_cvar: qubit count must equal n_vars");

  const std::size_t dim = state.dim();
  std::vector<std::uint32_t> order(dim);
  std::iota(order.begin(), order.end(), 0U);
  std::vector<double> energy(dim);
  for (std::size_t i = 0; i < dim; ++i) energy[i] = inst.energy_of_index(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return energy[a] < energy[b]; });

  double mass = 0.0;
  double acc = 0.0;
  for (std::uint32_t idx : order) {
    const double p = std::norm(state.amps[idx]);
    if (p <= 0.0) continue;
    const double take = std::min(p, alpha - mass);
    acc += take * energy[idx];
    mass += take;
    if (mass >= alpha) break;
  }
  // mass == alpha unless the state norm fell short of alpha numerically
  return acc / mass;
}

/// Repeatedly grants the (unassigned AV, BS with spare capacity) pair of
/// largest WR; feasible by construction when total capacity suffices.
inline AssignmentMatrix greedy_baseline(const WeightedRateMatrix& wr,
                                        const std::vector<std::size_t>& capacities) {
  if (capacities.size() != wr.n_bs)
    throw std::invalid_argument("greedy_baseline: capacities size must equal n_bs");
  const std::size_t total_cap = std::accumulate(capacities.begin(), capacities.end(), std::size_t{0});
  if (total_cap < wr.n_avs)
    throw std::runtime_error("greedy_baseline: total capacity " + std::to_string(total_cap) +
                             " cannot serve " + std::to_string(wr.n_avs) + " AVs");

  AssignmentMatrix a;
  a.n_avs = wr.n_avs;
  a.n_bs = wr.n_bs;
  a.u.assign(wr.n_avs * wr.n_bs, 0);

  std::vector<std::size_t> remaining = capacities;
  std::vector<std::uint8_t> assigned(wr.n_avs, 0);
  for (std::size_t round = 0; round < wr.n_avs; ++round) {
    double best = -1.0;
    std::size_t best_av = 0, best_bs = 0;
    for (std::size_t i = 0; i < wr.n_avs; ++i) {
      if (assigned[i]) continue;
      for (std::size_t j = 0; j < wr.n_bs; ++j) {
        if (remaining[j] == 0) continue;
        if (wr.at(i, j) > best) {
          best = wr.at(i, j);
          best_av = i;
          best_bs = j;
        }
      }
    }
    assigned[best_av] = 1;
    --remaining[best_bs];
    a.at(best_av, best_bs) = 1;
  }
  return a;
}

}  // namespace vqgap
