#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vqgap/cvar_vqe.hpp"
#include "vqgap/qsim.hpp"
#include "vqgap/qubo.hpp"
#include "vqgap/vnet.hpp"

namespace vqgap {

/// Shortest decimal form that round-trips a double exactly.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char probe[40];
      std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
      std::sscanf(probe, "%lf", &back);
      if (back == v) return probe;
    }
  }
  return buf;
}

/// Fixed 12-significant-digit form for tabular output.
inline std::string fmt_csv(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace detail

/// Flat `key = value` file with '#' comments; keeps insertion order so
/// serialized configs are byte-stable.
class KvFile {
 public:
  static KvFile parse(const std::string& text) {
    KvFile kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
      kv.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return kv;
  }

  static KvFile load(const std::string& path) { return parse(read_text_file(path)); }

  std::string format() const {
    std::ostringstream out;
    for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
    return out.str();
  }

  void save(const std::string& path) const { write_text_file(path, format()); }

  bool has(const std::string& key) const { return index_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) {
    auto it = index_.find(key);
    if (it == index_.end()) {
      index_[key] = entries_.size();
      entries_.emplace_back(key, value);
    } else {
      entries_[it->second].second = value;
    }
  }

  void set_double(const std::string& key, double v) { set(key, fmt_double(v)); }
  void set_count(const std::string& key, std::size_t v) { set(key, std::to_string(v)); }
  void set_int(const std::string& key, long long v) { set(key, std::to_string(v)); }
  void set_bool(const std::string& key, bool v) { set(key, v ? "true" : "false"); }

  template <typename T, typename Fmt>
  void set_list(const std::string& key, const std::vector<T>& values, Fmt fmt) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) s += ",";
      s += fmt(values[i]);
    }
    set(key, s);
  }

  std::optional<std::string> get(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return entries_[it->second].second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
      return std::stod(*v);
    } catch (...) {
      throw std::runtime_error("config key '" + key + "': not a number: " + *v);
    }
  }

  std::size_t get_count(const std::string& key, std::size_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    const long long n = std::stoll(*v);
    if (n < 0) throw std::runtime_error("config key '" + key + "': must be >= 0");
    return static_cast<std::size_t>(n);
  }

  long long get_int(const std::string& key, long long fallback) const {
    auto v = get(key);
    return v ? std::stoll(*v) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw std::runtime_error("config key '" + key + "': not a boolean: " + *v);
  }

  std::vector<std::string> get_list(const std::string& key) const {
    auto v = get(key);
    if (!v || v->empty()) return {};
    return detail::split(*v, ',');
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : get_list(key)) out.push_back(std::stod(s));
    return out;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---- enum names ----

inline std::string to_string(OptimizerKind k) {
  return k == OptimizerKind::SimplexSearch ? "simplex" : "spsa";
}

inline OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "simplex") return OptimizerKind::SimplexSearch;
  if (s == "spsa") return OptimizerKind::Spsa;
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected simplex|spsa)");
}

inline std::string to_string(ParamInit i) {
  return i == ParamInit::UniformRandom ? "random" : "zeros";
}

inline ParamInit init_from_string(const std::string& s) {
  if (s == "random") return ParamInit::UniformRandom;
  if (s == "zeros") return ParamInit::Zeros;
  throw std::invalid_argument("unknown init '" + s + "' (expected random|zeros)");
}

inline std::string to_string(Entangler e) {
  return e == Entangler::LinearChain ? "linear" : "full";
}

inline Entangler entangler_from_string(const std::string& s) {
  if (s == "linear") return Entangler::LinearChain;
  if (s == "full") return Entangler::Full;
  throw std::invalid_argument("unknown entangler '" + s + "' (expected linear|full)");
}

inline BsType bs_type_from_string(const std::string& s) {
  if (s == "rf") return BsType::Rf;
  if (s == "thz") return BsType::Thz;
  throw std::invalid_argument("unknown BS type '" + s + "' (expected rf|thz)");
}

// ---- config <-> kv ----

inline void to_kv(const VNetConfig& c, KvFile& kv) {
  kv.set_count("n_rbs", c.n_rbs);
  kv.set_count("n_tbs", c.n_tbs);
  kv.set_count("n_avs", c.n_avs);
  kv.set_double("highway_length", c.highway_length);
  kv.set_count("n_lanes", c.n_lanes);
  kv.set_double("lane_width", c.lane_width);
  kv.set_double("f_rf", c.f_rf);
  kv.set_double("f_thz", c.f_thz);
  kv.set_double("rho", c.rho);
  kv.set_double("p_tx_rf", c.p_tx_rf);
  kv.set_double("p_tx_thz", c.p_tx_thz);
  kv.set_double("g_tx_rf", c.g_tx_rf);
  kv.set_double("g_rx_rf", c.g_rx_rf);
  kv.set_double("g_tx_thz", c.g_tx_thz);
  kv.set_double("g_rx_thz", c.g_rx_thz);
  kv.set_double("k_a", c.k_a);
  kv.set_double("sigma2_dbm", c.sigma2_dbm);
  kv.set_double("n_molecular_dbm", c.n_molecular_dbm);
  kv.set_double("w_rf", c.w_rf);
  kv.set_double("w_thz", c.w_thz);
  kv.set_double("q_align", c.q_align);
  kv.set_double("mu_rf", c.mu_rf);
  kv.set_double("mu_thz", c.mu_thz);
  kv.set_double("gamma_th", c.gamma_th);
  kv.set_count("cap_rf", c.cap_rf);
  kv.set_count("cap_tbs", c.cap_tbs);
  kv.set_double("antenna_height", c.antenna_height);
}

inline VNetConfig vnet_config_from_kv(const KvFile& kv) {
  VNetConfig c;
  c.n_rbs = kv.get_count("n_rbs", c.n_rbs);
  c.n_tbs = kv.get_count("n_tbs", c.n_tbs);
  c.n_avs = kv.get_count("n_avs", c.n_avs);
  c.highway_length = kv.get_double("highway_length", c.highway_length);
  c.n_lanes = kv.get_count("n_lanes", c.n_lanes);
  c.lane_width = kv.get_double("lane_width", c.lane_width);
  c.f_rf = kv.get_double("f_rf", c.f_rf);
  c.f_thz = kv.get_double("f_thz", c.f_thz);
  c.rho = kv.get_double("rho", c.rho);
  c.p_tx_rf = kv.get_double("p_tx_rf", c.p_tx_rf);
  c.p_tx_thz = kv.get_double("p_tx_thz", c.p_tx_thz);
  c.g_tx_rf = kv.get_double("g_tx_rf", c.g_tx_rf);
  c.g_rx_rf = kv.get_double("g_rx_rf", c.g_rx_rf);
  c.g_tx_thz = kv.get_double("g_tx_thz", c.g_tx_thz);
  c.g_rx_thz = kv.get_double("g_rx_thz", c.g_rx_thz);
  c.k_a = kv.get_double("k_a", c.k_a);
  c.sigma2_dbm = kv.get_double("sigma2_dbm", c.sigma2_dbm);
  c.n_molecular_dbm = kv.get_double("n_molecular_dbm", c.n_molecular_dbm);
  c.w_rf = kv.get_double("w_rf", c.w_rf);
  c.w_thz = kv.get_double("w_thz", c.w_thz);
  c.q_align = kv.get_double("q_align", c.q_align);
  c.mu_rf = kv.get_double("mu_rf", c.mu_rf);
  c.mu_thz = kv.get_double("mu_thz", c.mu_thz);
  c.gamma_th = kv.get_double("gamma_th", c.gamma_th);
  c.cap_rf = kv.get_count("cap_rf", c.cap_rf);
  c.cap_tbs = kv.get_count("cap_tbs", c.cap_tbs);
  c.antenna_height = kv.get_double("antenna_height", c.antenna_height);
  c.validate();
  return c;
}

inline void to_kv(const CvarConfig& c, KvFile& kv) {
  kv.set_double("alpha", c.alpha);
  kv.set_count("k_shots", c.k_shots);
  kv.set_count("max_evals", c.max_evals);
  kv.set_count("seed", c.seed);
  kv.set("optimizer", to_string(c.optimizer));
  kv.set("init", to_string(c.init));
  kv.set_double("ftol", c.ftol);
}

inline CvarConfig cvar_config_from_kv(const KvFile& kv) {
  CvarConfig c;
  c.alpha = kv.get_double("alpha", c.alpha);
  c.k_shots = kv.get_count("k_shots", c.k_shots);
  c.max_evals = kv.get_count("max_evals", c.max_evals);
  c.seed = kv.get_count("seed", c.seed);
  if (auto v = kv.get("optimizer")) c.optimizer = optimizer_from_string(*v);
  if (auto v = kv.get("init")) c.init = init_from_string(*v);
  c.ftol = kv.get_double("ftol", c.ftol);
  c.validate();
  return c;
}

// ---- scenario <-> kv ----

inline KvFile scenario_to_kv(const Scenario& s) {
  KvFile kv;
  to_kv(s.config, kv);
  auto fmt_point = [](const Point2& p) { return fmt_double(p.x) + ":" + fmt_double(p.y); };
  kv.set_list("bs_positions", s.bs_positions, fmt_point);
  kv.set_list("bs_types", s.bs_types, [](BsType t) { return std::string(to_string(t)); });
  kv.set_list("av_positions", s.av_positions, fmt_point);
  kv.set_list("fading_gains", s.fading_gains, [](double v) { return fmt_double(v); });
  kv.set_list("prior_association", s.prior_association,
              [](std::ptrdiff_t j) { return std::to_string(j); });
  return kv;
}

inline Scenario scenario_from_kv(const KvFile& kv) {
  Scenario s;
  s.config = vnet_config_from_kv(kv);
  auto parse_point = [](const std::string& t) {
    const auto colon = t.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("expected x:y point, got '" + t + "'");
    return Point2{std::stod(t.substr(0, colon)), std::stod(t.substr(colon + 1))};
  };
  for (const auto& t : kv.get_list("bs_positions")) s.bs_positions.push_back(parse_point(t));
  for (const auto& t : kv.get_list("bs_types")) s.bs_types.push_back(bs_type_from_string(t));
  for (const auto& t : kv.get_list("av_positions")) s.av_positions.push_back(parse_point(t));
  s.fading_gains = kv.get_double_list("fading_gains");
  for (const auto& t : kv.get_list("prior_association"))
    s.prior_association.push_back(static_cast<std::ptrdiff_t>(std::stoll(t)));
  s.validate();
  return s;
}

// ---- GapInstance <-> JSON ----

inline nlohmann::json gap_to_json(const GapInstance& inst) {
  return nlohmann::json{{"wr", inst.wr},         {"capacities", inst.capacities},
                        {"lambda1", inst.lambda1}, {"lambda2", inst.lambda2},
                        {"n_avs", inst.n_avs},     {"n_bs", inst.n_bs}};
}

inline GapInstance gap_from_json(const nlohmann::json& j) {
  GapInstance inst;
  try {
    inst.n_avs = j.at("n_avs").get<std::size_t>();
    inst.n_bs = j.at("n_bs").get<std::size_t>();
    inst.wr = j.at("wr").get<std::vector<double>>();
    inst.capacities = j.at("capacities").get<std::vector<std::size_t>>();
    inst.lambda1 = j.at("lambda1").get<double>();
    inst.lambda2 = j.at("lambda2").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("instance JSON: ") + e.what());
  }
  if (inst.wr.size() != inst.n_avs * inst.n_bs)
    throw std::runtime_error("instance JSON: wr must hold n_avs * n_bs entries");
  if (inst.capacities.size() != inst.n_bs)
    throw std::runtime_error("instance JSON: capacities must hold n_bs entries");
  if (inst.n_vars() > kMaxVariables)
    throw std::length_error("instance JSON: exceeds " + std::to_string(kMaxVariables) +
                            " variables");
  return inst;
}

inline void save_gap_instance(const GapInstance& inst, const std::string& path) {
  write_text_file(path, gap_to_json(inst).dump(2) + "\n");
}

inline GapInstance load_gap_instance(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("instance JSON parse error in " + path + ": " + e.what());
  }
  return gap_from_json(j);
}

// ---- CSV exports ----

inline std::string wr_matrix_csv(const WeightedRateMatrix& m) {
  std::ostringstream out;
  out << "av,bs,wr,feasible\n";
  for (std::size_t i = 0; i < m.n_avs; ++i)
    for (std::size_t j = 0; j < m.n_bs; ++j)
      out << i << ',' << j << ',' << fmt_csv(m.at(i, j)) << ','
          << (m.feasible_at(i, j) ? 1 : 0) << '\n';
  return out.str();
}

inline std::string trace_csv(const OptimizerTrace& trace, std::size_t n_vars) {
  std::ostringstream out;
  out << "eval,cvar,mean_energy,best_energy,best_bits,ground_prob\n";
  for (const auto& r : trace.records)
    out << r.eval_index << ',' << fmt_csv(r.cvar) << ',' << fmt_csv(r.mean_energy) << ','
        << fmt_csv(r.best_energy) << ',' << bitstring_text(r.best_state, n_vars) << ','
        << fmt_csv(r.ground_prob) << '\n';
  return out.str();
}

inline std::string amplitudes_csv(const Statevector& state) {
  std::ostringstream out;
  out << "index,re,im\n";
  for (std::size_t i = 0; i < state.dim(); ++i)
    out << i << ',' << fmt_csv(state.amps[i].real()) << ',' << fmt_csv(state.amps[i].imag())
        << '\n';
  return out.str();
}

}  // namespace vqgap
