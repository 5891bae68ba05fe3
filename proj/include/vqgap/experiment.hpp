#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vqgap/cvar_vqe.hpp"
#include "vqgap/io.hpp"
#include "vqgap/oracle.hpp"
#include "vqgap/svgplot.hpp"
#include "vqgap/vnet.hpp"

namespace vqgap {

inline constexpr const char* kLibraryVersion = "0.1.0";

enum class ExperimentMode : std::uint8_t { Convergence, QubitSweep, BsSweep, DepthSweep, Single };

inline std::string to_string(ExperimentMode m) {
  switch (m) {
    case ExperimentMode::Convergence: return "convergence";
    case ExperimentMode::QubitSweep: return "sweep-qubits";
    case ExperimentMode::BsSweep: return "sweep-bs";
    case ExperimentMode::DepthSweep: return "sweep-depth";
    case ExperimentMode::Single: return "single";
  }
  return "?";
}

inline ExperimentMode mode_from_string(const std::string& s) {
  if (s == "convergence") return ExperimentMode::Convergence;
  if (s == "sweep-qubits") return ExperimentMode::QubitSweep;
  if (s == "sweep-bs") return ExperimentMode::BsSweep;
  if (s == "sweep-depth") return ExperimentMode::DepthSweep;
  if (s == "single") return ExperimentMode::Single;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

/// Everything one experiment run depends on; serializable, and sufficient
/// to reproduce every output byte.
struct ExperimentSpec {
  ExperimentMode mode = ExperimentMode::Convergence;
  std::vector<double> alphas = {0.25, 0.5, 1.0};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<std::size_t> depths = {1, 2, 3};       // convergence + depth sweep
  std::vector<std::size_t> qubit_counts = {2, 4, 6};
  std::vector<std::size_t> bs_counts = {2, 3, 4, 5, 6};
  VNetConfig vnet;
  CvarConfig cvar;  // alpha/seed are overridden per run
  std::uint64_t scenario_seed = 1;
  std::string instance_file;  // when set, single/convergence load this instead of generating
  std::string out_dir = "out";
  bool normalize = false;
  bool use_prior = false;  // attach max-SINR prior so handoff penalties bind
  bool plots = true;
  std::size_t jobs = 0;  // 0 = hardware concurrency
  Entangler entangler = Entangler::LinearChain;

  void validate() const {
    if (alphas.empty()) throw std::invalid_argument("ExperimentSpec.alphas: need at least one");
    for (double a : alphas)
      if (!(a > 0.0 && a <= 1.0))
        throw std::invalid_argument("ExperimentSpec.alphas: entries must lie in (0, 1]");
    if (seeds.empty()) throw std::invalid_argument("ExperimentSpec.seeds: need at least one");
    if (mode == ExperimentMode::Convergence && depths.empty())
      throw std::invalid_argument("ExperimentSpec.depths: need at least one");
    if (mode == ExperimentMode::DepthSweep && depths.empty())
      throw std::invalid_argument("ExperimentSpec.depths: need at least one");
    if (mode == ExperimentMode::QubitSweep && qubit_counts.empty())
      throw std::invalid_argument("ExperimentSpec.qubit_counts: need at least one");
    if (mode == ExperimentMode::BsSweep && bs_counts.empty())
      throw std::invalid_argument("ExperimentSpec.bs_counts: need at least one");
    vnet.validate();
  }
};

inline KvFile experiment_to_kv(const ExperimentSpec& s) {
  KvFile kv;
  kv.set("mode", to_string(s.mode));
  kv.set_list("alphas", s.alphas, [](double v) { return fmt_double(v); });
  kv.set_list("seeds", s.seeds, [](std::uint64_t v) { return std::to_string(v); });
  kv.set_list("depths", s.depths, [](std::size_t v) { return std::to_string(v); });
  kv.set_list("qubits", s.qubit_counts, [](std::size_t v) { return std::to_string(v); });
  kv.set_list("bs_counts", s.bs_counts, [](std::size_t v) { return std::to_string(v); });
  kv.set_count("scenario_seed", s.scenario_seed);
  kv.set("instance", s.instance_file);
  kv.set("out_dir", s.out_dir);
  kv.set_bool("normalize", s.normalize);
  kv.set("prior", s.use_prior ? "max-sinr" : "none");
  kv.set_bool("plots", s.plots);
  kv.set_count("jobs", s.jobs);
  kv.set("entangler", to_string(s.entangler));
  to_kv(s.vnet, kv);
  to_kv(s.cvar, kv);
  return kv;
}

inline ExperimentSpec experiment_from_kv(const KvFile& kv) {
  ExperimentSpec s;
  if (auto v = kv.get("mode")) s.mode = mode_from_string(*v);
  if (kv.has("alphas")) s.alphas = kv.get_double_list("alphas");
  if (kv.has("seeds")) {
    s.seeds.clear();
    for (const auto& t : kv.get_list("seeds")) s.seeds.push_back(std::stoull(t));
  }
  if (kv.has("n_seeds")) {
    const std::size_t n = kv.get_count("n_seeds", 0);
    s.seeds.clear();
    for (std::size_t i = 1; i <= n; ++i) s.seeds.push_back(i);
  }
  auto get_counts = [&](const char* key, std::vector<std::size_t>& out) {
    if (!kv.has(key)) return;
    out.clear();
    for (const auto& t : kv.get_list(key)) out.push_back(std::stoull(t));
  };
  get_counts("depths", s.depths);
  get_counts("qubits", s.qubit_counts);
  get_counts("bs_counts", s.bs_counts);
  s.scenario_seed = kv.get_count("scenario_seed", s.scenario_seed);
  if (auto v = kv.get("instance")) s.instance_file = *v;
  if (auto v = kv.get("out_dir")) s.out_dir = *v;
  s.normalize = kv.get_bool("normalize", s.normalize);
  if (auto v = kv.get("prior")) {
    if (*v == "max-sinr") s.use_prior = true;
    else if (*v == "none") s.use_prior = false;
    else throw std::invalid_argument("unknown prior '" + *v + "' (expected none|max-sinr)");
  }
  s.plots = kv.get_bool("plots", s.plots);
  s.jobs = kv.get_count("jobs", s.jobs);
  if (auto v = kv.get("entangler")) s.entangler = entangler_from_string(*v);
  s.vnet = vnet_config_from_kv(kv);
  s.cvar = cvar_config_from_kv(kv);
  return s;
}

struct RunSummary {
  std::vector<std::string> files;   // paths written, in emission order
  std::vector<std::string> report;  // human-readable observations, never assertions
};

namespace detail {

inline void parallel_for(std::size_t n_tasks, std::size_t jobs,
                         const std::function<void(std::size_t)>& task) {
  if (jobs == 0) jobs = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(1, n_tasks));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n_tasks) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Type-7 quantile on a pre-sorted vector.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (sorted.size() == 1) return sorted.front();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

inline double quantile_of(std::vector<double> values, double p) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return !std::isfinite(v); }),
               values.end());
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

inline double mean_finite(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values)
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

inline std::string alpha_tag(double alpha) { return fmt_double(alpha); }

struct BuiltInstance {
  Scenario scenario;
  WeightedRateMatrix wr;
  GapInstance gap;
};

inline BuiltInstance build_instance(const ExperimentSpec& spec, const VNetConfig& vnet,
                                    std::uint64_t scenario_seed) {
  BuiltInstance b;
  b.scenario = generate_scenario(vnet, scenario_seed);
  if (spec.use_prior) b.scenario.prior_association = attach_max_sinr(b.scenario);
  b.wr = weighted_rate_matrix(b.scenario, spec.normalize);
  b.gap = build_gap(b.wr, capacities_of(b.scenario));
  return b;
}

// 64-bit FNV-1a; pins the resolved spec in the manifest.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline void emit(RunSummary& summary, const std::string& path, const std::string& content) {
  write_text_file(path, content);
  summary.files.push_back(path);
}

inline void write_manifest(RunSummary& summary, const ExperimentSpec& spec) {
  std::filesystem::create_directories(spec.out_dir);
  const std::string resolved = experiment_to_kv(spec).format();
  const std::string cfg_path = spec.out_dir + "/resolved_config.kv";
  emit(summary, cfg_path, resolved);

  KvFile mf;
  mf.set("library_version", kLibraryVersion);
  mf.set("spec_hash", hex64(fnv1a(resolved)));
  mf.set("mode", to_string(spec.mode));
  mf.set_list("seeds", spec.seeds, [](std::uint64_t v) { return std::to_string(v); });
  mf.set_count("scenario_seed", spec.scenario_seed);
  mf.set("config_file", "resolved_config.kv");
  emit(summary, spec.out_dir + "/manifest.txt", mf.format());
}

inline void write_report(RunSummary& summary, const ExperimentSpec& spec) {
  std::string text;
  for (const auto& line : summary.report) text += line + "\n";
  emit(summary, spec.out_dir + "/report.txt", text);
}

}  // namespace detail

/// Renders a harness summary CSV as an SVG line plot. Convergence
/// aggregates (`alpha,eval,...`) become one series per alpha over the
/// best-feasible-Z median with the exact optimum as reference; sweep
/// summaries take their first column as x with one series per `z_*`
/// column. Throws on missing, empty, or all-NaN input without writing
/// anything.
inline std::string plot_of_csv(const std::string& csv_text, const std::string& title) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("plot: empty CSV");
  const std::vector<std::string> header = detail::split(line, ',');
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(detail::split(line, ','));
  if (rows.empty()) throw std::runtime_error("plot: CSV has no data rows");

  auto cell = [&](const std::vector<std::string>& row, std::size_t col) {
    return col < row.size() ? std::stod(row[col]) : std::numeric_limits<double>::quiet_NaN();
  };
  auto column_index = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    return std::nullopt;
  };

  std::vector<PlotSeries> series;
  std::optional<double> reference;
  std::string xlabel = header.empty() ? "x" : header[0];
  std::string ylabel = "best feasible Z";

  if (header.size() >= 2 && header[0] == "alpha" && header[1] == "eval") {
    const auto ycol = column_index("best_z_med");
    const auto refcol = column_index("z_opt");
    if (!ycol) throw std::runtime_error("plot: aggregate CSV lacks best_z_med");
    xlabel = "evaluation";
    for (const auto& row : rows) {
      const std::string key = "alpha=" + row[0];
      if (series.empty() || series.back().name != key) {
        bool found = false;
        for (const auto& s : series) found = found || s.name == key;
        if (!found) series.push_back({key, {}});
      }
      for (auto& s : series)
        if (s.name == key) s.points.emplace_back(cell(row, 1), cell(row, *ycol));
      if (refcol && !reference) {
        const double z = cell(rows.front(), *refcol);
        if (std::isfinite(z)) reference = z;
      }
    }
  } else {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c].rfind("z_", 0) != 0) continue;
      PlotSeries s;
      s.name = header[c];
      for (const auto& row : rows) s.points.emplace_back(cell(row, 0), cell(row, c));
      series.push_back(std::move(s));
    }
    if (series.empty()) throw std::runtime_error("plot: no z_* columns to draw");
  }
  return line_plot_svg(title, xlabel, ylabel, series, reference, "optimal");
}

/// Plot-beside-CSV emission; reads the summary back from disk so the image
/// is a pure function of the file bytes.
inline void emit_plot(const std::string& csv_path, const std::string& svg_path) {
  const std::string csv = read_text_file(csv_path);
  std::string title = csv_path;
  const auto slash = title.find_last_of('/');
  if (slash != std::string::npos) title = title.substr(slash + 1);
  const auto dot = title.find_last_of('.');
  if (dot != std::string::npos) title = title.substr(0, dot);
  write_text_file(svg_path, plot_of_csv(csv, title));
}

namespace detail {

inline void maybe_plot(RunSummary& summary, const ExperimentSpec& spec,
                       const std::string& csv_path, const std::string& svg_path) {
  if (!spec.plots) return;
  try {
    emit_plot(csv_path, svg_path);
    summary.files.push_back(svg_path);
  } catch (const std::exception& e) {
    summary.report.push_back("plot skipped (" + svg_path + "): " + e.what());
  }
}

}  // namespace detail

/// Loads the configured instance file, or generates one from the embedded
/// network config and scenario seed.
inline detail::BuiltInstance resolve_instance(const ExperimentSpec& spec) {
  if (!spec.instance_file.empty()) {
    detail::BuiltInstance b;
    b.gap = load_gap_instance(spec.instance_file);
    return b;
  }
  return detail::build_instance(spec, spec.vnet, spec.scenario_seed);
}

/// Convergence study: one trace per (depth, alpha, seed); per depth a raw
/// per-evaluation CSV and a median/IQR aggregate with the exact optimum as
/// reference.
inline RunSummary run_convergence(const ExperimentSpec& spec) {
  spec.validate();
  RunSummary summary;
  std::filesystem::create_directories(spec.out_dir);

  const detail::BuiltInstance built = resolve_instance(spec);
  const GapInstance& inst = built.gap;

  std::optional<OracleResult> oracle;
  if (inst.n_vars() <= kMaxVariables) {
    oracle = brute_force_optimum(inst);
  } else {
    summary.report.push_back("warning: instance too large for the exact reference; omitted");
  }
  std::optional<double> ground_energy;
  std::optional<double> z_opt;
  if (oracle) {
    ground_energy = oracle->best_energy;
    if (oracle->best_feasible_z) z_opt = *oracle->best_feasible_z;
  }

  for (std::size_t depth : spec.depths) {
    const AnsatzSpec ansatz = build_ansatz(inst.n_vars(), depth, spec.entangler);
    const std::size_t n_tasks = spec.alphas.size() * spec.seeds.size();
    std::vector<OptimizerTrace> traces(n_tasks);
    detail::parallel_for(n_tasks, spec.jobs, [&](std::size_t t) {
      const double alpha = spec.alphas[t / spec.seeds.size()];
      const std::uint64_t seed = spec.seeds[t % spec.seeds.size()];
      CvarConfig cfg = spec.cvar;
      cfg.alpha = alpha;
      cfg.seed = seed;
      traces[t] = optimize(inst, ansatz, cfg, ground_energy);
    });

    const std::string tag = "convergence_p" + std::to_string(depth);

    std::ostringstream raw;
    raw << "alpha,seed,eval,cvar,mean_energy,best_energy,best_bits,ground_prob,best_feasible_z\n";
    for (std::size_t t = 0; t < n_tasks; ++t) {
      const double alpha = spec.alphas[t / spec.seeds.size()];
      const std::uint64_t seed = spec.seeds[t % spec.seeds.size()];
      for (const auto& r : traces[t].records)
        raw << detail::alpha_tag(alpha) << ',' << seed << ',' << r.eval_index << ','
            << fmt_csv(r.cvar) << ',' << fmt_csv(r.mean_energy) << ',' << fmt_csv(r.best_energy)
            << ',' << bitstring_text(r.best_state, inst.n_vars()) << ','
            << fmt_csv(r.ground_prob) << ',' << fmt_csv(r.best_feasible_z) << '\n';
    }
    detail::emit(summary, spec.out_dir + "/" + tag + "_raw.csv", raw.str());

    std::size_t max_len = 0;
    for (const auto& tr : traces) max_len = std::max(max_len, tr.records.size());

    std::ostringstream agg;
    agg << "alpha,eval,cvar_med,cvar_q25,cvar_q75,best_z_med,best_z_q25,best_z_q75,z_opt\n";
    for (std::size_t ai = 0; ai < spec.alphas.size(); ++ai) {
      for (std::size_t ev = 0; ev < max_len; ++ev) {
        std::vector<double> cv, bz;
        for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
          const auto& recs = traces[ai * spec.seeds.size() + si].records;
          if (ev < recs.size()) {
            cv.push_back(recs[ev].cvar);
            bz.push_back(recs[ev].best_feasible_z);
          }
        }
        agg << detail::alpha_tag(spec.alphas[ai]) << ',' << ev << ','
            << fmt_csv(detail::quantile_of(cv, 0.5)) << ',' << fmt_csv(detail::quantile_of(cv, 0.25))
            << ',' << fmt_csv(detail::quantile_of(cv, 0.75)) << ','
            << fmt_csv(detail::quantile_of(bz, 0.5)) << ','
            << fmt_csv(detail::quantile_of(bz, 0.25)) << ',' << fmt_csv(detail::quantile_of(bz, 0.75))
            << ',' << fmt_csv(z_opt ? *z_opt : std::numeric_limits<double>::quiet_NaN()) << '\n';
      }
    }
    detail::emit(summary, spec.out_dir + "/" + tag + "_agg.csv", agg.str());
    detail::maybe_plot(summary, spec, spec.out_dir + "/" + tag + "_agg.csv",
                       spec.out_dir + "/" + tag + "_agg.svg");

    // Observed behavior, reported only.
    std::vector<double> finals(spec.alphas.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t ai = 0; ai < spec.alphas.size(); ++ai) {
      std::vector<double> bz;
      for (std::size_t si = 0; si < spec.seeds.size(); ++si)
        bz.push_back(traces[ai * spec.seeds.size() + si].best_feasible_z());
      finals[ai] = detail::quantile_of(bz, 0.5);
      std::ostringstream line;
      line << "p=" << depth << " alpha=" << detail::alpha_tag(spec.alphas[ai])
           << ": median best feasible Z = " << fmt_csv(finals[ai]);
      if (z_opt && std::isfinite(finals[ai]))
        line << " (" << fmt_csv(100.0 * finals[ai] / *z_opt) << "% of optimum "
             << fmt_csv(*z_opt) << ")";
      summary.report.push_back(line.str());
      if (ground_energy) {
        std::vector<double> peak, last;
        for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
          const auto& recs = traces[ai * spec.seeds.size() + si].records;
          double p = 0.0;
          for (const auto& r : recs) p = std::max(p, r.ground_prob);
          peak.push_back(p);
          last.push_back(recs.back().ground_prob);
        }
        summary.report.push_back(
            "p=" + std::to_string(depth) + " alpha=" + detail::alpha_tag(spec.alphas[ai]) +
            ": ground-state probability mean peak " + fmt_csv(detail::mean_finite(peak)) +
            ", mean final " + fmt_csv(detail::mean_finite(last)));
      }
    }
    if (spec.alphas.size() >= 2 && std::isfinite(finals[0]) && std::isfinite(finals[1])) {
      const double rel = std::abs(finals[0] - finals[1]) /
                         std::max({std::abs(finals[0]), std::abs(finals[1]), 1e-12});
      summary.report.push_back("p=" + std::to_string(depth) + ": alpha " +
                               detail::alpha_tag(spec.alphas[0]) + " vs " +
                               detail::alpha_tag(spec.alphas[1]) + " final medians differ by " +
                               fmt_csv(100.0 * rel) + "%");
    }
  }

  detail::write_manifest(summary, spec);
  detail::write_report(summary, spec);
  return summary;
}

namespace detail {

struct SweepPoint {
  std::string key;        // value of the sweep axis
  std::size_t n_avs = 0;
  std::size_t n_rbs = 0;
  std::size_t n_tbs = 0;
  std::size_t depth = 1;
};

/// Shared sweep loop: per point builds the instance, solves it exactly and
/// greedily, then averages the best feasible Z of CVaR-VQE across seeds for
/// each alpha.
inline RunSummary run_sweep(const ExperimentSpec& spec, const std::string& axis_name,
                            const std::vector<SweepPoint>& points,
                            const std::vector<std::string>& skipped) {
  RunSummary summary;
  std::filesystem::create_directories(spec.out_dir);
  for (const auto& msg : skipped) summary.report.push_back(msg);

  std::ostringstream csv;
  csv << axis_name << ",n_avs,n_bs,z_opt,z_greedy";
  for (double a : spec.alphas) csv << ",z_vqe_a" << alpha_tag(a);
  csv << '\n';

  for (const auto& pt : points) {
    VNetConfig vnet = spec.vnet;
    vnet.n_avs = pt.n_avs;
    vnet.n_rbs = pt.n_rbs;
    vnet.n_tbs = pt.n_tbs;
    const BuiltInstance built = build_instance(spec, vnet, spec.scenario_seed);
    const GapInstance& inst = built.gap;

    const OracleResult oracle = brute_force_optimum(inst);
    const double z_opt = oracle.best_feasible_z ? *oracle.best_feasible_z
                                                : std::numeric_limits<double>::quiet_NaN();
    double z_greedy = std::numeric_limits<double>::quiet_NaN();
    try {
      z_greedy = objective_z(inst, greedy_baseline(built.wr, inst.capacities));
    } catch (const std::runtime_error& e) {
      summary.report.push_back(std::string("greedy infeasible at ") + axis_name + "=" + pt.key +
                               ": " + e.what());
    }

    const AnsatzSpec ansatz = build_ansatz(inst.n_vars(), pt.depth, spec.entangler);
    const std::size_t n_tasks = spec.alphas.size() * spec.seeds.size();
    std::vector<double> best_z(n_tasks, std::numeric_limits<double>::quiet_NaN());
    parallel_for(n_tasks, spec.jobs, [&](std::size_t t) {
      CvarConfig cfg = spec.cvar;
      cfg.alpha = spec.alphas[t / spec.seeds.size()];
      cfg.seed = spec.seeds[t % spec.seeds.size()];
      best_z[t] = optimize(inst, ansatz, cfg).best_feasible_z();
    });

    csv << pt.key << ',' << inst.n_avs << ',' << inst.n_bs << ',' << fmt_csv(z_opt) << ','
        << fmt_csv(z_greedy);
    for (std::size_t ai = 0; ai < spec.alphas.size(); ++ai) {
      std::vector<double> zs(best_z.begin() + static_cast<std::ptrdiff_t>(ai * spec.seeds.size()),
                             best_z.begin() +
                                 static_cast<std::ptrdiff_t>((ai + 1) * spec.seeds.size()));
      const double zbar = mean_finite(zs);
      csv << ',' << fmt_csv(zbar);
      if (std::isfinite(zbar) && std::isfinite(z_opt) && zbar > z_opt + 1e-9 * std::abs(z_opt))
        throw std::logic_error("sweep invariant violated: method Z above exact optimum at " +
                               axis_name + "=" + pt.key);
    }
    csv << '\n';
  }

  const std::string stem = spec.out_dir + "/sweep_" + axis_name;
  emit(summary, stem + ".csv", csv.str());
  maybe_plot(summary, spec, stem + ".csv", stem + ".svg");
  write_manifest(summary, spec);
  write_report(summary, spec);
  return summary;
}

}  // namespace detail

/// Most balanced factorization n = n_avs * n_bs with n_avs <= n_bs.
inline std::optional<std::pair<std::size_t, std::size_t>> balanced_factorization(std::size_t n) {
  if (n == 0) return std::nullopt;
  for (std::size_t a = static_cast<std::size_t>(std::sqrt(static_cast<double>(n))); a >= 1; --a)
    if (n % a == 0) return std::make_pair(a, n / a);
  return std::nullopt;
}

/// Qubit sweep: each qubit count maps to the most balanced AV x BS split;
/// BS count splits evenly between RF and THz, RF first.
inline RunSummary run_qubit_sweep(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<detail::SweepPoint> points;
  std::vector<std::string> skipped;
  const std::size_t depth = spec.depths.empty() ? 1 : spec.depths.front();
  for (std::size_t n : spec.qubit_counts) {
    const auto fact = balanced_factorization(n);
    if (!fact || n > kMaxVariables) {
      skipped.push_back("notice: qubit count " + std::to_string(n) + " skipped (no usable split)");
      continue;
    }
    detail::SweepPoint pt;
    pt.key = std::to_string(n);
    pt.n_avs = fact->first;
    pt.n_rbs = (fact->second + 1) / 2;
    pt.n_tbs = fact->second / 2;
    pt.depth = depth;
    points.push_back(pt);
  }
  return detail::run_sweep(spec, "qubits", points, skipped);
}

/// BS sweep at fixed AV count; RF/THz split evenly, RF first.
inline RunSummary run_bs_sweep(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<detail::SweepPoint> points;
  std::vector<std::string> skipped;
  const std::size_t depth = spec.depths.empty() ? 1 : spec.depths.front();
  for (std::size_t n_bs : spec.bs_counts) {
    if (n_bs == 0 || spec.vnet.n_avs * n_bs > kMaxVariables) {
      skipped.push_back("notice: bs count " + std::to_string(n_bs) + " skipped (" +
                        std::to_string(spec.vnet.n_avs * n_bs) + " variables exceed the limit)");
      continue;
    }
    detail::SweepPoint pt;
    pt.key = std::to_string(n_bs);
    pt.n_avs = spec.vnet.n_avs;
    pt.n_rbs = (n_bs + 1) / 2;
    pt.n_tbs = n_bs / 2;
    pt.depth = depth;
    points.push_back(pt);
  }
  return detail::run_sweep(spec, "bs", points, skipped);
}

/// Circuit-depth sweep on the configured network size.
inline RunSummary run_depth_sweep(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<detail::SweepPoint> points;
  for (std::size_t p : spec.depths) {
    detail::SweepPoint pt;
    pt.key = std::to_string(p);
    pt.n_avs = spec.vnet.n_avs;
    pt.n_rbs = spec.vnet.n_rbs;
    pt.n_tbs = spec.vnet.n_tbs;
    pt.depth = p;
    points.push_back(pt);
  }
  RunSummary summary = detail::run_sweep(spec, "depth", points, {});

  // Depth behavior, reported only.
  if (points.size() >= 2) {
    try {
      const std::string csv = read_text_file(spec.out_dir + "/sweep_depth.csv");
      std::istringstream in(csv);
      std::string line;
      std::getline(in, line);  // header
      double best_z = -std::numeric_limits<double>::infinity();
      std::string best_p = "?";
      std::string first_alpha_col;
      while (std::getline(in, line)) {
        const auto cells = detail::split(line, ',');
        if (cells.size() < 6) continue;
        const double z = std::stod(cells[5]);  // first vqe column
        if (z > best_z) {
          best_z = z;
          best_p = cells[0];
        }
      }
      summary.report.push_back("depth sweep: best mean Z at p=" + best_p);
    } catch (...) {
    }
  }
  detail::write_report(summary, spec);
  return summary;
}

/// Single-instance solve: one CVaR-VQE run at the first alpha/seed, trace
/// in the canonical CSV schema, exact and greedy references when available.
inline RunSummary run_single(const ExperimentSpec& spec) {
  spec.validate();
  RunSummary summary;
  std::filesystem::create_directories(spec.out_dir);

  const detail::BuiltInstance built = resolve_instance(spec);
  const GapInstance& inst = built.gap;
  detail::emit(summary, spec.out_dir + "/instance.json", gap_to_json(inst).dump(2) + "\n");
  if (!built.wr.wr.empty())
    detail::emit(summary, spec.out_dir + "/wr_matrix.csv", wr_matrix_csv(built.wr));

  std::optional<OracleResult> oracle;
  if (inst.n_vars() <= kMaxVariables) oracle = brute_force_optimum(inst);

  CvarConfig cfg = spec.cvar;
  cfg.alpha = spec.alphas.front();
  cfg.seed = spec.seeds.front();
  const std::size_t depth = spec.depths.empty() ? 1 : spec.depths.front();
  const AnsatzSpec ansatz = build_ansatz(inst.n_vars(), depth, spec.entangler);
  const OptimizerTrace trace = optimize(
      inst, ansatz, cfg, oracle ? std::optional<double>(oracle->best_energy) : std::nullopt);

  detail::emit(summary, spec.out_dir + "/solve_trace.csv", trace_csv(trace, inst.n_vars()));

  summary.report.push_back("best energy " + fmt_csv(trace.best_energy()) + " at bitstring " +
                           bitstring_text(trace.best_state(), inst.n_vars()));
  summary.report.push_back("best feasible Z " + fmt_csv(trace.best_feasible_z()));
  if (oracle) {
    summary.report.push_back("exact optimum energy " + fmt_csv(oracle->best_energy) +
                             ", feasible Z " +
                             fmt_csv(oracle->best_feasible_z ? *oracle->best_feasible_z
                                                             : std::numeric_limits<double>::quiet_NaN()));
  }
  if (!built.wr.wr.empty()) {
    try {
      summary.report.push_back(
          "greedy Z " + fmt_csv(objective_z(inst, greedy_baseline(built.wr, inst.capacities))));
    } catch (const std::runtime_error&) {
    }
  }

  detail::write_manifest(summary, spec);
  detail::write_report(summary, spec);
  return summary;
}

inline RunSummary run_experiment(const ExperimentSpec& spec) {
  switch (spec.mode) {
    case ExperimentMode::Convergence: return run_convergence(spec);
    case ExperimentMode::QubitSweep: return run_qubit_sweep(spec);
    case ExperimentMode::BsSweep: return run_bs_sweep(spec);
    case ExperimentMode::DepthSweep: return run_depth_sweep(spec);
    case ExperimentMode::Single: return run_single(spec);
  }
  throw std::logic_error("unreachable mode");
}

}  // namespace vqgap
