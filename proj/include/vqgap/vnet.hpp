#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqgap/rng.hpp"

namespace vqgap {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

enum class BsType : std::uint8_t { Rf, Thz };

inline const char* to_string(BsType t) { return t == BsType::Rf ? "rf" : "thz"; }

/// Highway downlink network parameters. Distances in meters, powers in
/// watts, gains in dB, noise in dBm, bandwidths in Hz.
struct VNetConfig {
  std::size_t n_rbs = 2;            // RF base stations
  std::size_t n_tbs = 2;            // THz base stations
  std::size_t n_avs = 4;            // autonomous vehicles
  double highway_length = 1000.0;   // m
  std::size_t n_lanes = 4;
  double lane_width = 3.7;          // m
  double f_rf = 2.1e9;              // Hz
  double f_thz = 1.0e12;            // Hz
  double rho = 2.5;                 // RF path-loss exponent
  double p_tx_rf = 1.0;             // W
  double p_tx_thz = 1.0;            // W
  double g_tx_rf = 0.0;             // dB
  double g_rx_rf = 0.0;             // dB
  double g_tx_thz = 25.0;           // dB
  double g_rx_thz = 25.0;           // dB
  double k_a = 0.05;                // 1/m molecular absorption
  double sigma2_dbm = -70.0;        // RF receiver noise
  double n_molecular_dbm = -70.0;   // THz absorption + thermal noise
  double w_rf = 20e6;               // Hz
  double w_thz = 1e9;               // Hz
  double q_align = 0.1;             // beam alignment probability
  double mu_rf = 0.2;               // handoff penalty, RF target
  double mu_thz = 0.4;              // handoff penalty, THz target
  double gamma_th = -5.0;           // dB admission threshold
  std::size_t cap_rf = 2;           // max users per RBS
  std::size_t cap_tbs = 2;          // max users per TBS
  double antenna_height = 3.5;      // m, BS minus receiver height

  std::size_t n_bs() const { return n_rbs + n_tbs; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw std::invalid_argument("VNetConfig." + field + ": " + why);
    };
    if (n_rbs + n_tbs == 0) fail("n_rbs/n_tbs", "at least one base station required");
    if (n_avs == 0) fail("n_avs", "must be >= 1");
    if (!(highway_length > 0)) fail("highway_length", "must be > 0");
    if (n_lanes == 0) fail("n_lanes", "must be >= 1");
    if (!(lane_width > 0)) fail("lane_width", "must be > 0");
    if (!(f_rf > 0)) fail("f_rf", "must be > 0");
    if (!(f_thz > 0)) fail("f_thz", "must be > 0");
    if (!(rho >= 2.0)) fail("rho", "must be >= 2");
    if (!(p_tx_rf > 0)) fail("p_tx_rf", "must be > 0");
    if (!(p_tx_thz > 0)) fail("p_tx_thz", "must be > 0");
    if (!(k_a >= 0)) fail("k_a", "must be >= 0");
    if (!(w_rf > 0)) fail("w_rf", "must be > 0");
    if (!(w_thz > 0)) fail("w_thz", "must be > 0");
    if (!(q_align >= 0.0 && q_align <= 1.0)) fail("q_align", "must lie in [0, 1]");
    if (!(mu_rf >= 0.0)) fail("mu_rf", "must be >= 0");
    if (!(mu_rf <= mu_thz)) fail("mu_thz", "must be >= mu_rf");
    if (!(mu_thz < 1.0)) fail("mu_thz", "must be < 1");
    if (cap_rf < 1) fail("cap_rf", "must be >= 1");
    if (cap_tbs < 1) fail("cap_tbs", "must be >= 1");
    if (!(antenna_height >= 0)) fail("antenna_height", "must be >= 0");
    if (!std::isfinite(sigma2_dbm)) fail("sigma2_dbm", "must be finite");
    if (!std::isfinite(n_molecular_dbm)) fail("n_molecular_dbm", "must be finite");
    if (!std::isfinite(gamma_th)) fail("gamma_th", "must be finite");
  }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr std::ptrdiff_t kNoPrior = -1;

/// Immutable snapshot of BS/AV geometry and fading; safe to share across
/// threads once built.
struct Scenario {
  VNetConfig config;
  std::vector<Point2> bs_positions;
  std::vector<BsType> bs_types;
  std::vector<Point2> av_positions;
  std::vector<double> fading_gains;          // row-major n_avs x n_bs, RF links only
  std::vector<std::ptrdiff_t> prior_association;  // per AV; kNoPrior = none

  std::size_t n_bs() const { return bs_positions.size(); }
  std::size_t n_avs() const { return av_positions.size(); }

  double fading(std::size_t av, std::size_t bs) const {
    return fading_gains[av * n_bs() + bs];
  }

  void validate() const {
    if (bs_positions.size() != config.n_bs())
      throw std::invalid_argument("Scenario.bs_positions: size must equal n_rbs + n_tbs");
    if (bs_types.size() != bs_positions.size())
      throw std::invalid_argument("Scenario.bs_types: size must match bs_positions");
    if (av_positions.size() != config.n_avs)
      throw std::invalid_argument("Scenario.av_positions: size must equal n_avs");
    if (fading_gains.size() != av_positions.size() * bs_positions.size())
      throw std::invalid_argument("Scenario.fading_gains: must be n_avs x n_bs");
    const double road_width = static_cast<double>(config.n_lanes) * config.lane_width;
    auto in_box = [&](const Point2& p) {
      return p.x >= 0.0 && p.x <= config.highway_length && p.y >= 0.0 && p.y <= road_width;
    };
    for (const auto& p : bs_positions)
      if (!in_box(p)) throw std::invalid_argument("Scenario.bs_positions: out of bounds");
    for (const auto& p : av_positions)
      if (!in_box(p)) throw std::invalid_argument("Scenario.av_positions: out of bounds");
    for (double h : fading_gains)
      if (!(h > 0.0)) throw std::invalid_argument("Scenario.fading_gains: entries must be > 0");
    if (!prior_association.empty() && prior_association.size() != av_positions.size())
      throw std::invalid_argument("Scenario.prior_association: size must equal n_avs");
    for (std::ptrdiff_t j : prior_association)
      if (j != kNoPrior && (j < 0 || static_cast<std::size_t>(j) >= bs_positions.size()))
        throw std::invalid_argument("Scenario.prior_association: BS index out of range");
  }
};

/// Weighted-rate matrix WR plus the SINR admission mask. Entries are bits/s
/// (or bits/s/Hz when built with normalization).
struct WeightedRateMatrix {
  std::size_t n_avs = 0;
  std::size_t n_bs = 0;
  std::vector<double> wr;           // row-major
  std::vector<std::uint8_t> feasible;

  double at(std::size_t av, std::size_t bs) const { return wr[av * n_bs + bs]; }
  bool feasible_at(std::size_t av, std::size_t bs) const {
    return feasible[av * n_bs + bs] != 0;
  }
  double max_entry() const {
    double m = 0.0;
    for (double v : wr) m = std::max(m, v);
    return m;
  }
};

/// Deterministic scenario construction: BSs evenly spaced along the roadside
/// alternating RF/THz, AV positions uniform over (lane, position), unit-mean
/// exponential fading per AV-BS link. No prior association is set.
inline Scenario generate_scenario(const VNetConfig& config, std::uint64_t seed) {
  config.validate();
  Scenario s;
  s.config = config;

  const std::size_t n_bs = config.n_bs();
  s.bs_positions.reserve(n_bs);
  s.bs_types.reserve(n_bs);
  std::size_t rf_left = config.n_rbs;
  std::size_t thz_left = config.n_tbs;
  bool next_rf = rf_left > 0;
  for (std::size_t k = 0; k < n_bs; ++k) {
    const double x = (static_cast<double>(k) + 0.5) * config.highway_length /
                     static_cast<double>(n_bs);
    s.bs_positions.push_back({x, 0.0});  // roadside
    if (next_rf && rf_left > 0) {
      s.bs_types.push_back(BsType::Rf);
      --rf_left;
    } else if (thz_left > 0) {
      s.bs_types.push_back(BsType::Thz);
      --thz_left;
    } else {
      s.bs_types.push_back(BsType::Rf);
      --rf_left;
    }
    next_rf = !next_rf;
  }

  std::mt19937_64 pos_rng(mix_seed(seed, 0x01));
  s.av_positions.reserve(config.n_avs);
  for (std::size_t i = 0; i < config.n_avs; ++i) {
    const double x = uniform_range(pos_rng, 0.0, config.highway_length);
    const auto lane = uniform_index(pos_rng, config.n_lanes);
    const double y = (static_cast<double>(lane) + 0.5) * config.lane_width;
    s.av_positions.push_back({x, y});
  }

  std::mt19937_64 fade_rng(mix_seed(seed, 0x02));
  s.fading_gains.resize(config.n_avs * n_bs);
  for (double& h : s.fading_gains) h = exponential_unit_mean(fade_rng);

  s.prior_association.assign(config.n_avs, kNoPrior);
  return s;
}

namespace detail {

inline double link_distance(const Scenario& s, std::size_t av, std::size_t bs) {
  const double dx = s.av_positions[av].x - s.bs_positions[bs].x;
  const double dy = s.av_positions[av].y - s.bs_positions[bs].y;
  const double d2 = dx * dx + dy * dy;
  const double h = s.config.antenna_height;
  return std::sqrt(d2 + h * h);
}

inline void check_indices(const Scenario& s, std::size_t av, std::size_t bs) {
  if (av >= s.n_avs()) throw std::out_of_range("av index out of range");
  if (bs >= s.n_bs()) throw std::out_of_range("bs index out of range");
}

// Received power from RBS bs at AV av, fading included.
inline double rf_rx_power(const Scenario& s, std::size_t av, std::size_t bs) {
  const VNetConfig& c = s.config;
  const double lam = kSpeedOfLight / (4.0 * M_PI * c.f_rf);
  const double r = link_distance(s, av, bs);
  return c.p_tx_rf * db_to_linear(c.g_tx_rf) * db_to_linear(c.g_rx_rf) * lam * lam *
         s.fading(av, bs) / std::pow(r, c.rho);
}

// Received power from TBS bs at AV av; spreading loss r^-2 with molecular
// absorption, no small-scale fading term.
inline double thz_rx_power(const Scenario& s, std::size_t av, std::size_t bs) {
  const VNetConfig& c = s.config;
  const double lam = kSpeedOfLight / (4.0 * M_PI * c.f_thz);
  const double r = link_distance(s, av, bs);
  return db_to_linear(c.g_tx_thz) * db_to_linear(c.g_rx_thz) * lam * lam * c.p_tx_thz *
         std::exp(-c.k_a * r) / (r * r);
}

}  // namespace detail

/// SINR of the RF link (av, bs). Interference is the summed received power
/// from every other RBS.
inline double sinr_rf(const Scenario& s, std::size_t av, std::size_t bs) {
  detail::check_indices(s, av, bs);
  if (s.bs_types[bs] != BsType::Rf)
    throw std::invalid_argument("sinr_rf: BS " + std::to_string(bs) + " is not RF");
  const double signal = detail::rf_rx_power(s, av, bs);
  double interference = 0.0;
  for (std::size_t k = 0; k < s.n_bs(); ++k) {
    if (k == bs || s.bs_types[k] != BsType::Rf) continue;
    interference += detail::rf_rx_power(s, av, k);
  }
  const double noise = dbm_to_watt(s.config.sigma2_dbm);
  return signal / (noise + interference);
}

/// SINR of the THz link (av, bs). Both beams of an interfering TBS align
/// with probability q, so interference carries a q^2 factor (expected-value
/// model; keeps WR deterministic).
inline double sinr_thz(const Scenario& s, std::size_t av, std::size_t bs) {
  detail::check_indices(s, av, bs);
  if (s.bs_types[bs] != BsType::Thz)
    throw std::invalid_argument("sinr_thz: BS " + std::to_string(bs) + " is not THz");
  const double signal = detail::thz_rx_power(s, av, bs);
  const double q = s.config.q_align;
  double interference = 0.0;
  for (std::size_t k = 0; k < s.n_bs(); ++k) {
    if (k == bs || s.bs_types[k] != BsType::Thz) continue;
    interference += detail::thz_rx_power(s, av, k);
  }
  interference *= q * q;
  const double noise = dbm_to_watt(s.config.n_molecular_dbm);
  return signal / (noise + interference);
}

inline double sinr(const Scenario& s, std::size_t av, std::size_t bs) {
  detail::check_indices(s, av, bs);
  return s.bs_types[bs] == BsType::Rf ? sinr_rf(s, av, bs) : sinr_thz(s, av, bs);
}

/// Shannon rate gated by the admission threshold: 0 below gamma_th.
inline double link_rate(const Scenario& s, std::size_t av, std::size_t bs) {
  detail::check_indices(s, av, bs);
  const double snr = sinr(s, av, bs);
  if (snr < db_to_linear(s.config.gamma_th)) return 0.0;
  const double w = s.bs_types[bs] == BsType::Rf ? s.config.w_rf : s.config.w_thz;
  return w * std::log2(1.0 + snr);
}

inline std::size_t bs_capacity(const VNetConfig& c, BsType t) {
  return t == BsType::Rf ? c.cap_rf : c.cap_tbs;
}

inline double handoff_penalty(const VNetConfig& c, BsType target) {
  return target == BsType::Rf ? c.mu_rf : c.mu_thz;
}

/// WR_ij = R_ij / min(Q_j, n_j) * (1 - mu_ij). The load estimate n_j is
/// caller-supplied so WR stays assignment-independent; mu applies only when
/// a prior association exists and differs from the candidate BS. Pass
/// normalize=true for rate/bandwidth units.
inline WeightedRateMatrix weighted_rate_matrix(const Scenario& s,
                                               const std::vector<std::size_t>& load_estimate,
                                               bool normalize = false) {
  if (load_estimate.size() != s.n_bs())
    throw std::invalid_argument("weighted_rate_matrix: load_estimate size must equal n_bs");
  for (std::size_t n : load_estimate)
    if (n == 0) throw std::domain_error("weighted_rate_matrix: load estimate entries must be >= 1");

  WeightedRateMatrix m;
  m.n_avs = s.n_avs();
  m.n_bs = s.n_bs();
  m.wr.resize(m.n_avs * m.n_bs, 0.0);
  m.feasible.resize(m.n_avs * m.n_bs, 0);

  const double gamma_lin = db_to_linear(s.config.gamma_th);
  for (std::size_t i = 0; i < m.n_avs; ++i) {
    for (std::size_t j = 0; j < m.n_bs; ++j) {
      const double snr = sinr(s, i, j);
      const bool ok = snr >= gamma_lin;
      m.feasible[i * m.n_bs + j] = ok ? 1 : 0;
      if (!ok) continue;
      const double w = s.bs_types[j] == BsType::Rf ? s.config.w_rf : s.config.w_thz;
      double rate = w * std::log2(1.0 + snr);
      if (normalize) rate /= w;
      const double share =
          static_cast<double>(std::min(bs_capacity(s.config, s.bs_types[j]), load_estimate[j]));
      double mu = 0.0;
      if (!s.prior_association.empty() && s.prior_association[i] != kNoPrior &&
          s.prior_association[i] != static_cast<std::ptrdiff_t>(j)) {
        mu = handoff_penalty(s.config, s.bs_types[j]);
      }
      m.wr[i * m.n_bs + j] = rate / share * (1.0 - mu);
    }
  }
  return m;
}

inline WeightedRateMatrix weighted_rate_matrix(const Scenario& s, bool normalize = false) {
  return weighted_rate_matrix(s, std::vector<std::size_t>(s.n_bs(), 1), normalize);
}

/// Best-SINR attachment, usable as a prior association for handoff studies.
inline std::vector<std::ptrdiff_t> attach_max_sinr(const Scenario& s) {
  std::vector<std::ptrdiff_t> prior(s.n_avs(), kNoPrior);
  for (std::size_t i = 0; i < s.n_avs(); ++i) {
    double best = -1.0;
    for (std::size_t j = 0; j < s.n_bs(); ++j) {
      const double v = sinr(s, i, j);
      if (v > best) {
        best = v;
        prior[i] = static_cast<std::ptrdiff_t>(j);
      }
    }
  }
  return prior;
}

/// Per-BS capacities in BS index order.
inline std::vector<std::size_t> capacities_of(const Scenario& s) {
  std::vector<std::size_t> caps;
  caps.reserve(s.n_bs());
  for (BsType t : s.bs_types) caps.push_back(bs_capacity(s.config, t));
  return caps;
}

}  // namespace vqgap
