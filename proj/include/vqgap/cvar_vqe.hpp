#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqgap/optim.hpp"
#include "vqgap/oracle.hpp"
#include "vqgap/qsim.hpp"
#include "vqgap/qubo.hpp"
#include "vqgap/rng.hpp"

namespace vqgap {

enum class OptimizerKind : std::uint8_t { SimplexSearch, Spsa };
enum class ParamInit : std::uint8_t { UniformRandom, Zeros };

struct CvarConfig {
  double alpha = 0.25;          // tail fraction; 1.0 recovers the plain mean
  std::size_t k_shots = 1000;   // measurements per objective evaluation
  std::size_t max_evals = 150;  // objective evaluation budget
  std::uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::SimplexSearch;
  ParamInit init = ParamInit::UniformRandom;
  double ftol = 0.0;  // early-stop threshold per optimizer cycle; 0 disables

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw std::invalid_argument("CvarConfig.alpha: must lie in (0, 1]");
    if (k_shots < 1) throw std::invalid_argument("CvarConfig.k_shots: must be >= 1");
    if (static_cast<std::size_t>(alpha * static_cast<double>(k_shots) + 1e-9) < 1)
      throw std::invalid_argument("CvarConfig: floor(alpha * k_shots) must be >= 1");
    if (max_evals < 1) throw std::invalid_argument("CvarConfig.max_evals: must be >= 1");
  }
};

/// Mean of the lowest floor(alpha*K) energies. alpha = 1 is the plain
/// sample mean, accumulated in input order.
inline double cvar_of_energies(std::vector<double> energies, double alpha) {
  if (energies.empty()) throw std::domain_error("cvar_of_energies: empty energy list");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::domain_error("cvar_of_energies: alpha must lie in (0, 1]");
  const std::size_t k = energies.size();
  const std::size_t m =
      static_cast<std::size_t>(alpha * static_cast<double>(k) + 1e-9);  // floor
  if (m < 1)
    throw std::invalid_argument("cvar_of_energies: floor(alpha * K) is zero for K = " +
                                std::to_string(k));
  if (m >= k)
    return std::accumulate(energies.begin(), energies.end(), 0.0) / static_cast<double>(k);
  std::sort(energies.begin(), energies.end());
  return std::accumulate(energies.begin(), energies.begin() + static_cast<std::ptrdiff_t>(m),
                         0.0) /
         static_cast<double>(m);
}

struct Evaluation {
  double cvar = 0.0;
  SampleSet samples;
};

/// One objective evaluation: prepare |Psi(theta)>, measure k_shots
/// bitstrings, score each with the instance energy. Deterministic per
/// (params, shot_seed).
inline Evaluation evaluate_params(const AnsatzSpec& spec, const ParamVector& params,
                                  const GapInstance& inst, const CvarConfig& cfg,
                                  std::uint64_t shot_seed) {
  if (spec.n_qubits != inst.n_vars())
    throw std::invalid_argument("evaluate_params: ansatz has " + std::to_string(spec.n_qubits) +
                                " qubits but instance has " + std::to_string(inst.n_vars()) +
                                " variables");
  cfg.validate();
  Evaluation out;
  const Statevector state = prepare_state(spec, params);
  out.samples = sample(state, cfg.k_shots, shot_seed);
  out.samples.energies.resize(out.samples.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples.energies[i] = inst.energy_of_index(out.samples.states[i]);
  out.cvar = cvar_of_energies(out.samples.energies, cfg.alpha);
  return out;
}

/// Probability mass on bitstrings whose energy matches ground_energy
/// within 1e-9.
inline double ground_state_probability(const Statevector& state, const GapInstance& inst,
                                       double ground_energy) {
  if (state.n_qubits != inst.n_vars())
    throw std::invalid_argument("ground_state_probability: qubit count must equal n_vars");
  double p = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i)
    if (std::abs(inst.energy_of_index(i) - ground_energy) <= 1e-9)
      p += std::norm(state.amps[i]);
  return p;
}

struct TraceRecord {
  std::size_t eval_index = 0;
  double cvar = 0.0;
  double mean_energy = 0.0;
  double best_energy = 0.0;        // lowest sample energy seen so far
  std::uint64_t best_state = 0;    // its bitstring; ties -> lowest value
  double ground_prob = std::numeric_limits<double>::quiet_NaN();
  double best_feasible_z = std::numeric_limits<double>::quiet_NaN();
};

struct OptimizerTrace {
  std::vector<TraceRecord> records;
  ParamVector final_params;  // lowest-objective parameters over all evaluations
  std::size_t n_iterations = 0;
  bool converged = false;

  double best_energy() const { return records.back().best_energy; }
  std::uint64_t best_state() const { return records.back().best_state; }
  double best_feasible_z() const { return records.back().best_feasible_z; }
};

namespace detail {

// Precomputed per-bitstring energies and feasibility; worth the memory up
// to 20 variables (8 MB), above that evaluate directly.
inline constexpr std::size_t kTableMaxVars = 20;

struct EnergyTable {
  std::vector<double> energy;
  std::vector<std::uint8_t> feasible;

  static EnergyTable build(const GapInstance& inst) {
    EnergyTable t;
    const std::uint64_t dim = std::uint64_t{1} << inst.n_vars();
    t.energy.resize(dim);
    t.feasible.resize(dim);
    for (std::uint64_t i = 0; i < dim; ++i) {
      t.energy[i] = inst.energy_of_index(i);
      t.feasible[i] = is_feasible(i, inst) ? 1 : 0;
    }
    return t;
  }
};

}  // namespace detail

/// Full CVaR-VQE run: derivative-free minimization of
/// theta -> CVaR_alpha(sample energies of |Psi(theta)>), one trace record
/// per objective evaluation. Shot seeds advance as cfg.seed + eval_index,
/// so identical inputs replay bitwise-identical traces. When ground_energy
/// is supplied (verified externally), each record carries the exact
/// probability mass on ground states.
inline OptimizerTrace optimize(const GapInstance& inst, const AnsatzSpec& spec,
                               const CvarConfig& cfg,
                               std::optional<double> ground_energy = std::nullopt) {
  if (spec.n_qubits != inst.n_vars())
    throw std::invalid_argument("optimize: ansatz has " + std::to_string(spec.n_qubits) +
                                " qubits but instance has " + std::to_string(inst.n_vars()) +
                                " variables");
  cfg.validate();

  std::optional<detail::EnergyTable> table;
  if (inst.n_vars() <= detail::kTableMaxVars) table = detail::EnergyTable::build(inst);

  OptimizerTrace trace;
  trace.records.reserve(cfg.max_evals);

  double best_energy = std::numeric_limits<double>::infinity();
  std::uint64_t best_state = 0;
  double best_feasible_z = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> energies(cfg.k_shots);

  const Objective objective = [&](const std::vector<double>& params) {
    const std::size_t eval_index = trace.records.size();
    const Statevector state = prepare_state(spec, params);
    const SampleSet samples = sample(state, cfg.k_shots, cfg.seed + eval_index);

    for (std::size_t i = 0; i < samples.size(); ++i) {
      const std::uint64_t s = samples.states[i];
      const double e = table ? table->energy[s] : inst.energy_of_index(s);
      energies[i] = e;
      if (e < best_energy || (e == best_energy && s < best_state)) {
        best_energy = e;
        best_state = s;
      }
      const bool feas = table ? table->feasible[s] != 0 : is_feasible(s, inst);
      if (feas) {
        const double z = -e;  // penalties vanish on feasible bitstrings
        if (!(z <= best_feasible_z)) best_feasible_z = z;  // NaN-aware max
      }
    }

    const double mean =
        std::accumulate(energies.begin(), energies.end(), 0.0) / static_cast<double>(cfg.k_shots);
    const double cvar = cvar_of_energies(energies, cfg.alpha);
    if (!std::isfinite(cvar)) {
      std::string at;
      for (double v : params) at += (at.empty() ? "" : " ") + std::to_string(v);
      throw std::runtime_error("optimize: non-finite objective at evaluation " +
                               std::to_string(eval_index) + ", params [" + at + "]");
    }

    TraceRecord rec;
    rec.eval_index = eval_index;
    rec.cvar = cvar;
    rec.mean_energy = mean;
    rec.best_energy = best_energy;
    rec.best_state = best_state;
    rec.best_feasible_z = best_feasible_z;
    if (ground_energy) {
      double p = 0.0;
      if (table) {
        for (std::size_t i = 0; i < state.dim(); ++i)
          if (std::abs(table->energy[i] - *ground_energy) <= 1e-9) p += std::norm(state.amps[i]);
      } else {
        p = ground_state_probability(state, inst, *ground_energy);
      }
      rec.ground_prob = p;
    }
    trace.records.push_back(rec);
    return cvar;
  };

  ParamVector x0(spec.n_params(), 0.0);
  if (cfg.init == ParamInit::UniformRandom) {
    std::mt19937_64 rng(mix_seed(cfg.seed, 0x7a7a));
    for (double& v : x0) v = uniform_range(rng, 0.0, 2.0 * M_PI);
  }

  OptimResult result;
  if (cfg.optimizer == OptimizerKind::SimplexSearch) {
    NelderMeadOptions opt;
    opt.max_evals = cfg.max_evals;
    opt.ftol = cfg.ftol;
    result = nelder_mead(objective, x0, opt);
  } else {
    SpsaOptions opt;
    opt.max_evals = cfg.max_evals;
    opt.ftol = cfg.ftol;
    opt.seed = cfg.seed;
    result = spsa(objective, x0, opt);
  }

  trace.final_params = result.best_x;
  trace.n_iterations = result.n_iterations;
  trace.converged = result.converged;
  return trace;
}

}  // namespace vqgap
