#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "vqgap/qsim.hpp"
#include "vqgap/qubo.hpp"
#include "vqgap/rng.hpp"
#include "vqgap/vnet.hpp"

namespace testutil {

/// Hand-built scenario with explicit geometry; fading defaults to 1 on
/// every link so closed-form checks stay simple.
inline vqgap::Scenario make_scenario(const vqgap::VNetConfig& config,
                                     std::vector<vqgap::Point2> bs_positions,
                                     std::vector<vqgap::BsType> bs_types,
                                     std::vector<vqgap::Point2> av_positions,
                                     std::vector<double> fading = {}) {
  vqgap::Scenario s;
  s.config = config;
  s.bs_positions = std::move(bs_positions);
  s.bs_types = std::move(bs_types);
  s.av_positions = std::move(av_positions);
  if (fading.empty())
    s.fading_gains.assign(s.av_positions.size() * s.bs_positions.size(), 1.0);
  else
    s.fading_gains = std::move(fading);
  s.prior_association.assign(s.av_positions.size(), vqgap::kNoPrior);
  s.config.validate();
  s.validate();
  return s;
}

/// Random positive WR with capacities that always admit a feasible
/// assignment; default penalty weights.
inline vqgap::GapInstance random_instance(std::size_t n_avs, std::size_t n_bs,
                                          std::uint64_t seed, double lo = 1.0,
                                          double hi = 10.0) {
  std::mt19937_64 rng(vqgap::mix_seed(seed, 0xbeef));
  vqgap::WeightedRateMatrix wr;
  wr.n_avs = n_avs;
  wr.n_bs = n_bs;
  wr.wr.resize(n_avs * n_bs);
  wr.feasible.assign(n_avs * n_bs, 1);
  for (double& v : wr.wr) v = vqgap::uniform_range(rng, lo, hi);

  std::vector<std::size_t> caps(n_bs);
  std::size_t total = 0;
  for (auto& q : caps) {
    q = 1 + vqgap::uniform_index(rng, 2);
    total += q;
  }
  for (std::size_t k = 0; total < n_avs; ++k, ++total) ++caps[k % n_bs];

  return vqgap::build_gap(wr, caps);
}

/// Angles biased toward a target bitstring's product state plus noise.
/// Relative comparisons against exact tail expectations are only
/// well-conditioned when the alpha-tail sits inside the low-energy cluster,
/// which is where optimized circuits live anyway.
inline vqgap::ParamVector basin_biased_params(const vqgap::AnsatzSpec& spec,
                                              std::uint64_t target, std::mt19937_64& rng,
                                              double spread = 0.6) {
  vqgap::ParamVector p(spec.n_params());
  for (std::size_t q = 0; q < spec.n_qubits; ++q)
    p[q] = (((target >> q) & 1ULL) ? M_PI : 0.0) + vqgap::uniform_range(rng, -spread, spread);
  for (std::size_t k = spec.n_qubits; k < spec.n_params(); ++k)
    p[k] = vqgap::uniform_range(rng, -spread, spread);
  return p;
}

/// A GapInstance used purely as a diagonal energy map: 1 AV x n_bs with
/// chosen per-bit weights and row penalty, so tests can dial in arbitrary
/// small spectra.
inline vqgap::GapInstance diagonal_instance(std::vector<double> negated_weights,
                                            double lambda1) {
  vqgap::GapInstance inst;
  inst.n_avs = 1;
  inst.n_bs = negated_weights.size();
  inst.wr = std::move(negated_weights);
  inst.capacities.assign(inst.n_bs, inst.n_bs);
  inst.lambda1 = lambda1;
  inst.lambda2 = 1.0;
  return inst;
}

}  // namespace testutil
