// Command-line experiment harness: convergence studies, parameter sweeps,
// single-instance solves and exact reference solutions for the CVaR-VQE
// user-association library.

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vqgap/experiment.hpp"
#include "vqgap/io.hpp"
#include "vqgap/oracle.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::string alpha_list;
  std::string seed_list;
  std::string depth_list;
  std::string qubit_list;
  std::string bs_list;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_seeds;
  std::optional<std::size_t> depth;
  std::optional<std::size_t> shots;
  std::optional<std::size_t> evals;
  std::optional<std::size_t> jobs;
  std::optional<bool> normalize;
  std::optional<bool> plots;
  std::string instance;
  std::string prior;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key-value config file");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--alpha", f.alpha_list, "comma-separated CVaR tail fractions");
  cmd->add_option("--seeds", f.seed_list, "comma-separated run seeds");
  cmd->add_option("--seed", f.seed, "base seed (also the scenario seed)");
  cmd->add_option("--n-seeds", f.n_seeds, "number of consecutive run seeds");
  cmd->add_option("--depth", f.depth, "circuit depth p");
  cmd->add_option("--depths", f.depth_list, "comma-separated circuit depths");
  cmd->add_option("--qubits", f.qubit_list, "comma-separated qubit counts (sweep-qubits)");
  cmd->add_option("--bs-counts", f.bs_list, "comma-separated BS counts (sweep-bs)");
  cmd->add_option("--shots", f.shots, "measurement shots per evaluation");
  cmd->add_option("--evals", f.evals, "objective evaluation budget");
  cmd->add_option("--jobs", f.jobs, "worker threads (0 = all cores)");
  cmd->add_option("--instance", f.instance, "GAP instance JSON to solve instead of generating");
  cmd->add_option("--prior", f.prior, "prior association: none|max-sinr");
  cmd->add_flag("--normalize,!--no-normalize", f.normalize, "rates as bits/s/Hz");
  cmd->add_flag("--plots,!--no-plots", f.plots, "emit SVG plots");
}

std::vector<std::size_t> parse_counts(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& t : vqgap::detail::split(s, ',')) out.push_back(std::stoull(t));
  return out;
}

vqgap::ExperimentSpec resolve_spec(const CommonFlags& f, vqgap::ExperimentMode mode) {
  vqgap::ExperimentSpec spec;
  if (!f.config.empty()) spec = vqgap::experiment_from_kv(vqgap::KvFile::load(f.config));
  spec.mode = mode;
  if (!f.out.empty()) spec.out_dir = f.out;
  if (!f.alpha_list.empty()) {
    spec.alphas.clear();
    for (const auto& t : vqgap::detail::split(f.alpha_list, ','))
      spec.alphas.push_back(std::stod(t));
  }
  if (!f.seed_list.empty()) {
    spec.seeds.clear();
    for (const auto& t : vqgap::detail::split(f.seed_list, ','))
      spec.seeds.push_back(std::stoull(t));
  }
  if (f.seed) {
    const std::size_t n = f.n_seeds.value_or(1);
    spec.seeds.clear();
    for (std::size_t i = 0; i < n; ++i) spec.seeds.push_back(*f.seed + i);
    spec.scenario_seed = *f.seed;
  } else if (f.n_seeds) {
    spec.seeds.clear();
    for (std::size_t i = 1; i <= *f.n_seeds; ++i) spec.seeds.push_back(i);
  }
  if (f.depth) spec.depths = {*f.depth};
  if (!f.depth_list.empty()) spec.depths = parse_counts(f.depth_list);
  if (!f.qubit_list.empty()) spec.qubit_counts = parse_counts(f.qubit_list);
  if (!f.bs_list.empty()) spec.bs_counts = parse_counts(f.bs_list);
  if (f.shots) spec.cvar.k_shots = *f.shots;
  if (f.evals) spec.cvar.max_evals = *f.evals;
  if (f.jobs) spec.jobs = *f.jobs;
  if (f.normalize) spec.normalize = *f.normalize;
  if (f.plots) spec.plots = *f.plots;
  if (!f.instance.empty()) spec.instance_file = f.instance;
  if (!f.prior.empty()) {
    if (f.prior == "max-sinr") spec.use_prior = true;
    else if (f.prior == "none") spec.use_prior = false;
    else throw std::invalid_argument("unknown --prior '" + f.prior + "'");
  }
  return spec;
}

int run_mode(const CommonFlags& f, vqgap::ExperimentMode mode) {
  const vqgap::ExperimentSpec spec = resolve_spec(f, mode);
  const vqgap::RunSummary summary = vqgap::run_experiment(spec);
  for (const auto& line : summary.report) std::cout << line << "\n";
  std::cout << "wrote " << summary.files.size() << " files to " << spec.out_dir << "\n";
  return 0;
}

int run_oracle(const std::string& instance_path) {
  const vqgap::GapInstance inst = vqgap::load_gap_instance(instance_path);
  const vqgap::OracleResult res = vqgap::brute_force_optimum(inst);
  std::cout << "variables: " << inst.n_vars() << "\n";
  std::cout << "minimum energy: " << vqgap::fmt_csv(res.best_energy) << " at "
            << vqgap::bitstring_text(res.best_state, inst.n_vars()) << "\n";
  std::cout << "ground states: " << res.n_ground_states << "\n";
  if (res.best_feasible_state) {
    std::cout << "best feasible Z: " << vqgap::fmt_csv(*res.best_feasible_z) << " at "
              << vqgap::bitstring_text(*res.best_feasible_state, inst.n_vars()) << "\n";
  } else {
    std::cout << "no feasible assignment exists\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CVaR-driven variational solver for vehicular user association"};
  app.require_subcommand(1);

  CommonFlags f;
  struct ModeCommand {
    CLI::App* cmd;
    vqgap::ExperimentMode mode;
  };
  const std::vector<ModeCommand> modes = {
      {app.add_subcommand("convergence", "objective traces per (alpha, seed, depth)"),
       vqgap::ExperimentMode::Convergence},
      {app.add_subcommand("sweep-qubits", "solution quality vs qubit count"),
       vqgap::ExperimentMode::QubitSweep},
      {app.add_subcommand("sweep-bs", "solution quality vs BS count at fixed AVs"),
       vqgap::ExperimentMode::BsSweep},
      {app.add_subcommand("sweep-depth", "solution quality vs circuit depth"),
       vqgap::ExperimentMode::DepthSweep},
      {app.add_subcommand("solve", "solve one instance and dump its trace"),
       vqgap::ExperimentMode::Single},
  };
  for (const auto& m : modes) add_common(m.cmd, f);

  auto* orc = app.add_subcommand("oracle", "brute-force a GAP instance JSON");
  std::string oracle_instance;
  orc->add_option("instance", oracle_instance, "path to instance JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (orc->parsed()) return run_oracle(oracle_instance);
    for (const auto& m : modes)
      if (m.cmd->parsed()) return run_mode(f, m.mode);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
