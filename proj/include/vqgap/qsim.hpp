#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vqgap/qubo.hpp"
#include "vqgap/rng.hpp"

namespace vqgap {

inline constexpr std::size_t kMaxQubits = kMaxVariables;

enum class Entangler : std::uint8_t { LinearChain, Full };

/// Layered variational circuit: one RY rotation per qubit, then depth_p
/// repetitions of [CZ entangler block; RY layer]. Parameter count is
/// n_qubits * (depth_p + 1).
struct AnsatzSpec {
  std::size_t n_qubits = 0;
  std::size_t depth_p = 0;
  Entangler entangler = Entangler::LinearChain;

  std::size_t n_params() const { return n_qubits * (depth_p + 1); }
};

using ParamVector = std::vector<double>;

inline AnsatzSpec build_ansatz(std::size_t n_qubits, std::size_t depth_p,
                               Entangler entangler = Entangler::LinearChain) {
  if (n_qubits == 0) throw std::domain_error("build_ansatz: need at least one qubit");
  if (n_qubits > kMaxQubits)
    throw std::length_error("build_ansatz: at most " + std::to_string(kMaxQubits) + " qubits");
  return AnsatzSpec{n_qubits, depth_p, entangler};
}

/// CZ pairs applied in one entangler block, in application order.
inline std::vector<std::pair<std::size_t, std::size_t>> entangler_pairs(const AnsatzSpec& spec) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (spec.entangler == Entangler::LinearChain) {
    for (std::size_t q = 0; q + 1 < spec.n_qubits; ++q) pairs.emplace_back(q, q + 1);
  } else {
    for (std::size_t a = 0; a < spec.n_qubits; ++a)
      for (std::size_t b = a + 1; b < spec.n_qubits; ++b) pairs.emplace_back(a, b);
  }
  return pairs;
}

/// Dense amplitude vector, little-endian: qubit 0 is the least significant
/// bit of the basis index. Gates mutate in place; do not share a state
/// between concurrent writers.
struct Statevector {
  std::size_t n_qubits = 0;
  std::vector<std::complex<double>> amps;

  Statevector() = default;

  explicit Statevector(std::size_t n) : n_qubits(n) {
    if (n == 0) throw std::domain_error("Statevector: need at least one qubit");
    if (n > kMaxQubits)
      throw std::length_error("Statevector: at most " + std::to_string(kMaxQubits) + " qubits");
    amps.assign(std::size_t{1} << n, {0.0, 0.0});
    amps[0] = {1.0, 0.0};
  }

  std::size_t dim() const { return amps.size(); }

  double norm_sq() const {
    double t = 0.0;
    for (const auto& a : amps) t += std::norm(a);
    return t;
  }
};

/// Single-qubit Y rotation: |0> -> cos(t/2)|0> + sin(t/2)|1>,
/// |1> -> -sin(t/2)|0> + cos(t/2)|1>.
inline void apply_ry(Statevector& state, std::size_t qubit, double theta) {
  if (qubit >= state.n_qubits) throw std::out_of_range("apply_ry: qubit index out of range");
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const std::size_t stride = std::size_t{1} << qubit;
  const std::size_t dim = state.dim();
  auto* a = state.amps.data();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t off = 0; off < stride; ++off) {
      const std::size_t i0 = base + off;
      const std::size_t i1 = i0 + stride;
      const std::complex<double> a0 = a[i0];
      const std::complex<double> a1 = a[i1];
      a[i0] = c * a0 - s * a1;
      a[i1] = s * a0 + c * a1;
    }
  }
}

/// Controlled-Z: negates amplitudes with both qubits set. Self-inverse.
inline void apply_cz(Statevector& state, std::size_t a, std::size_t b) {
  if (a == b) throw std::domain_error("apply_cz: qubits must differ");
  if (a >= state.n_qubits || b >= state.n_qubits)
    throw std::out_of_range("apply_cz: qubit index out of range");
  const std::uint64_t mask = (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
  const std::size_t dim = state.dim();
  for (std::size_t i = 0; i < dim; ++i)
    if ((i & mask) == mask) state.amps[i] = -state.amps[i];
}

inline Statevector prepare_state(const AnsatzSpec& spec, const ParamVector& params) {
  if (params.size() != spec.n_params())
    throw std::invalid_argument("prepare_state: expected " + std::to_string(spec.n_params()) +
                                " parameters, got " + std::to_string(params.size()));
  Statevector state(spec.n_qubits);
  const auto pairs = entangler_pairs(spec);
  std::size_t next = 0;
  for (std::size_t q = 0; q < spec.n_qubits; ++q) apply_ry(state, q, params[next++]);
  for (std::size_t layer = 0; layer < spec.depth_p; ++layer) {
    for (const auto& [a, b] : pairs) apply_cz(state, a, b);
    for (std::size_t q = 0; q < spec.n_qubits; ++q) apply_ry(state, q, params[next++]);
  }
  return state;
}

/// Measured bitstrings as basis indices (bit k of the index = qubit k),
/// with caller-filled per-sample energies.
struct SampleSet {
  std::size_t n_qubits = 0;
  std::vector<std::uint64_t> states;
  std::vector<double> energies;

  std::size_t size() const { return states.size(); }
  Bits bits(std::size_t i) const { return bits_of_index(states[i], n_qubits); }
};

/// Probabilities |amplitude|^2 over all 2^n outcomes.
inline std::vector<double> exact_distribution(const Statevector& state) {
  std::vector<double> p(state.dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(state.amps[i]);
  return p;
}

/// k i.i.d. computational-basis measurements, deterministic per seed.
/// Rejects states whose norm deviates from 1 by more than 1e-6.
inline SampleSet sample(const Statevector& state, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw std::domain_error("sample: need at least one shot");
  const double total = state.norm_sq();
  if (std::abs(total - 1.0) > 1e-6)
    throw std::runtime_error("sample: state is not normalized (|norm^2 - 1| = " +
                             std::to_string(std::abs(total - 1.0)) + ")");

  std::mt19937_64 rng(seed);
  // Sort the uniforms, sweep the cumulative mass once, then restore draw order.
  std::vector<std::pair<double, std::uint32_t>> draws(k);
  for (std::size_t i = 0; i < k; ++i)
    draws[i] = {uniform_unit(rng) * total, static_cast<std::uint32_t>(i)};
  std::sort(draws.begin(), draws.end());

  SampleSet out;
  out.n_qubits = state.n_qubits;
  out.states.resize(k);

  const std::size_t dim = state.dim();
  double cum = 0.0;
  std::size_t next_draw = 0;
  for (std::size_t idx = 0; idx < dim && next_draw < k; ++idx) {
    cum += std::norm(state.amps[idx]);
    while (next_draw < k && draws[next_draw].first < cum) {
      out.states[draws[next_draw].second] = idx;
      ++next_draw;
    }
  }
  // Rounding may leave a sliver of mass unassigned; map it to the last outcome.
  for (; next_draw < k; ++next_draw) out.states[draws[next_draw].second] = dim - 1;
  return out;
}

}  // namespace vqgap
