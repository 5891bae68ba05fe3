#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqgap/vnet.hpp"

namespace vqgap {

/// Hard cap shared by the enumerator and the simulator; both fail loudly
/// instead of degrading.
inline constexpr std::size_t kMaxVariables = 24;

using Bits = std::vector<std::uint8_t>;

/// Binary AV-to-BS assignment, u[i][j] = 1 iff AV i is served by BS j.
struct AssignmentMatrix {
  std::size_t n_avs = 0;
  std::size_t n_bs = 0;
  std::vector<std::uint8_t> u;  // row-major

  std::uint8_t at(std::size_t av, std::size_t bs) const { return u[av * n_bs + bs]; }
  std::uint8_t& at(std::size_t av, std::size_t bs) { return u[av * n_bs + bs]; }
};

/// Assignment problem in penalized diagonal-Hamiltonian form. Variable
/// k = av * n_bs + bs maps bit k to link (av, bs); this row-major layout is
/// the canonical contract for every bit-vector below.
struct GapInstance {
  std::size_t n_avs = 0;
  std::size_t n_bs = 0;
  std::vector<double> wr;               // row-major n_avs x n_bs
  std::vector<std::size_t> capacities;  // per BS
  double lambda1 = 0.0;                 // one-BS-per-AV penalty weight
  double lambda2 = 0.0;                 // capacity penalty weight

  std::size_t n_vars() const { return n_avs * n_bs; }
  double wr_at(std::size_t av, std::size_t bs) const { return wr[av * n_bs + bs]; }

  /// Objective energy of one packed bitstring (bit k = bit k of `state`):
  /// -sum(WR u) + lambda1 * sum_i (row_i - 1)^2 + lambda2 * sum_j max(0, col_j - Q_j)^2.
  double energy_of_index(std::uint64_t state) const {
    double rate = 0.0;
    double row_pen = 0.0;
    std::size_t k = 0;
    // stack column loads; n_bs <= kMaxVariables
    std::size_t col[kMaxVariables] = {0};
    for (std::size_t i = 0; i < n_avs; ++i) {
      std::size_t row = 0;
      for (std::size_t j = 0; j < n_bs; ++j, ++k) {
        if ((state >> k) & 1ULL) {
          rate += wr[k];
          ++row;
          ++col[j];
        }
      }
      const double d = static_cast<double>(row) - 1.0;
      row_pen += d * d;
    }
    double cap_pen = 0.0;
    for (std::size_t j = 0; j < n_bs; ++j) {
      if (col[j] > capacities[j]) {
        const double d = static_cast<double>(col[j] - capacities[j]);
        cap_pen += d * d;
      }
    }
    return -rate + lambda1 * row_pen + lambda2 * cap_pen;
  }

  double energy(std::span<const std::uint8_t> bits) const {
    if (bits.size() != n_vars())
      throw std::invalid_argument("GapInstance::energy: expected " + std::to_string(n_vars()) +
                                  " bits, got " + std::to_string(bits.size()));
    std::uint64_t state = 0;
    for (std::size_t k = 0; k < bits.size(); ++k)
      if (bits[k]) state |= 1ULL << k;
    return energy_of_index(state);
  }
};

/// Penalty weights large enough that any single constraint violation costs
/// more than any single rate gain.
inline double default_penalty_weight(const WeightedRateMatrix& wr) {
  return 2.0 * wr.max_entry();
}

inline GapInstance build_gap(const WeightedRateMatrix& wr, const std::vector<std::size_t>& capacities,
                             double lambda1, double lambda2) {
  if (capacities.size() != wr.n_bs)
    throw std::invalid_argument("build_gap: capacities size must equal n_bs");
  if (wr.wr.size() != wr.n_avs * wr.n_bs)
    throw std::invalid_argument("build_gap: WR matrix shape mismatch");
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw std::invalid_argument("build_gap: penalty weights must be positive");
  if (wr.n_avs * wr.n_bs > kMaxVariables)
    throw std::length_error("build_gap: instance exceeds " + std::to_string(kMaxVariables) +
                            " variables");
  GapInstance inst;
  inst.n_avs = wr.n_avs;
  inst.n_bs = wr.n_bs;
  inst.wr = wr.wr;
  inst.capacities = capacities;
  inst.lambda1 = lambda1;
  inst.lambda2 = lambda2;
  return inst;
}

inline GapInstance build_gap(const WeightedRateMatrix& wr,
                             const std::vector<std::size_t>& capacities) {
  double lambda = default_penalty_weight(wr);
  if (lambda == 0.0) lambda = 1.0;  // every link inadmissible; any positive weight dominates
  return build_gap(wr, capacities, lambda, lambda);
}

/// Spin-variable form of a quadratic binary cost: offset + sum h_k s_k +
/// sum_{k<l} J_kl s_k s_l with s = 2x - 1.
struct IsingModel {
  std::vector<double> linear;
  std::vector<double> quadratic;  // upper triangle, row-major pairs k < l
  double offset = 0.0;

  std::size_t n_vars() const { return linear.size(); }

  static std::size_t pair_index(std::size_t n, std::size_t k, std::size_t l) {
    // k < l; offset of row k into the packed upper triangle
    return k * n - k * (k + 1) / 2 + (l - k - 1);
  }

  double coupling(std::size_t k, std::size_t l) const {
    if (k == l) throw std::domain_error("IsingModel::coupling: no diagonal couplings");
    if (k > l) std::swap(k, l);
    return quadratic[pair_index(n_vars(), k, l)];
  }
};

/// Exact change of variables x_k -> (1 + s_k)/2 for E(x) = sum_kl x_k Q_kl x_l.
/// Q must be square and symmetric (tolerance 1e-12).
inline IsingModel qubo_to_ising(const std::vector<std::vector<double>>& q) {
  const std::size_t n = q.size();
  for (const auto& row : q)
    if (row.size() != n) throw std::invalid_argument("qubo_to_ising: matrix must be square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(q[i][j] - q[j][i]) > 1e-12)
        throw std::invalid_argument("qubo_to_ising: matrix must be symmetric");

  IsingModel m;
  m.linear.assign(n, 0.0);
  m.quadratic.assign(n * (n - 1) / 2, 0.0);

  double total = 0.0;
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      total += q[i][j];
      row_sum += q[i][j];
      if (j > i) m.quadratic[IsingModel::pair_index(n, i, j)] = 0.5 * q[i][j];
    }
    trace += q[i][i];
    m.linear[i] = 0.5 * row_sum;
  }
  m.offset = 0.25 * (total + trace);
  return m;
}

inline double ising_energy(const IsingModel& m, std::span<const int> spins) {
  const std::size_t n = m.n_vars();
  if (spins.size() != n)
    throw std::invalid_argument("ising_energy: expected " + std::to_string(n) + " spins");
  for (int s : spins)
    if (s != -1 && s != 1) throw std::domain_error("ising_energy: spins must be -1 or +1");
  double e = m.offset;
  for (std::size_t k = 0; k < n; ++k) e += m.linear[k] * spins[k];
  std::size_t idx = 0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = k + 1; l < n; ++l, ++idx) e += m.quadratic[idx] * spins[k] * spins[l];
  return e;
}

inline Bits bits_of_index(std::uint64_t state, std::size_t n_vars) {
  Bits bits(n_vars);
  for (std::size_t k = 0; k < n_vars; ++k) bits[k] = (state >> k) & 1ULL;
  return bits;
}

inline std::uint64_t index_of_bits(std::span<const std::uint8_t> bits) {
  std::uint64_t state = 0;
  for (std::size_t k = 0; k < bits.size(); ++k)
    if (bits[k]) state |= 1ULL << k;
  return state;
}

/// Bit k = 1 at row-major position (av, bs); leftmost text character in
/// dumps corresponds to bit 0.
inline std::string bitstring_text(std::uint64_t state, std::size_t n_vars) {
  std::string s(n_vars, '0');
  for (std::size_t k = 0; k < n_vars; ++k)
    if ((state >> k) & 1ULL) s[k] = '1';
  return s;
}

inline AssignmentMatrix decode_assignment(std::span<const std::uint8_t> bits, std::size_t n_avs,
                                          std::size_t n_bs) {
  if (bits.size() != n_avs * n_bs)
    throw std::invalid_argument("decode_assignment: bit count must equal n_avs * n_bs");
  AssignmentMatrix a;
  a.n_avs = n_avs;
  a.n_bs = n_bs;
  a.u.assign(bits.begin(), bits.end());
  return a;
}

inline AssignmentMatrix decode_assignment(std::uint64_t state, std::size_t n_avs,
                                          std::size_t n_bs) {
  const Bits bits = bits_of_index(state, n_avs * n_bs);
  return decode_assignment(bits, n_avs, n_bs);
}

inline Bits encode_assignment(const AssignmentMatrix& a) {
  return Bits(a.u.begin(), a.u.end());
}

/// The maximization objective Z = sum u_ij WR_ij, no penalty terms.
inline double objective_z(const GapInstance& inst, const AssignmentMatrix& a) {
  if (a.n_avs != inst.n_avs || a.n_bs != inst.n_bs)
    throw std::invalid_argument("objective_z: assignment shape mismatch");
  double z = 0.0;
  for (std::size_t k = 0; k < inst.n_vars(); ++k)
    if (a.u[k]) z += inst.wr[k];
  return z;
}

}  // namespace vqgap
