#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "test_util.hpp"
#include "vqgap/experiment.hpp"

using namespace vqgap;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ExperimentSpec tiny_spec(const std::string& out_dir) {
  ExperimentSpec spec;
  spec.alphas = {0.25, 1.0};
  spec.seeds = {1, 2, 3};
  spec.depths = {1};
  spec.vnet.n_avs = 2;
  spec.vnet.n_rbs = 1;
  spec.vnet.n_tbs = 1;
  spec.cvar.k_shots = 100;
  spec.cvar.max_evals = 25;
  spec.out_dir = out_dir;
  spec.plots = true;
  spec.jobs = 2;
  return spec;
}

std::size_t count_lines(const std::string& path) {
  const std::string text = read_text_file(path);
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("experiment specs round-trip through kv") {
  ExperimentSpec spec = tiny_spec("somewhere");
  spec.mode = ExperimentMode::BsSweep;
  spec.bs_counts = {2, 3};
  spec.normalize = true;
  spec.use_prior = true;
  spec.entangler = Entangler::Full;
  const ExperimentSpec back = experiment_from_kv(KvFile::parse(experiment_to_kv(spec).format()));
  CHECK(back.mode == spec.mode);
  CHECK(back.alphas == spec.alphas);
  CHECK(back.seeds == spec.seeds);
  CHECK(back.bs_counts == spec.bs_counts);
  CHECK(back.normalize == spec.normalize);
  CHECK(back.use_prior == spec.use_prior);
  CHECK(back.entangler == spec.entangler);
  CHECK(back.cvar.k_shots == spec.cvar.k_shots);
  CHECK(back.vnet.n_avs == spec.vnet.n_avs);
  CHECK(back.out_dir == "somewhere");
}

TEST_CASE("balanced factorizations match the documented mapping") {
  CHECK(balanced_factorization(2) == std::make_pair<std::size_t, std::size_t>(1, 2));
  CHECK(balanced_factorization(4) == std::make_pair<std::size_t, std::size_t>(2, 2));
  CHECK(balanced_factorization(6) == std::make_pair<std::size_t, std::size_t>(2, 3));
  CHECK(balanced_factorization(9) == std::make_pair<std::size_t, std::size_t>(3, 3));
  CHECK(balanced_factorization(7) == std::make_pair<std::size_t, std::size_t>(1, 7));
  CHECK_FALSE(balanced_factorization(0).has_value());
}

TEST_CASE("convergence emits raw, aggregate, manifest, and report files") {
  TempDir dir("vqgap_conv_test");
  const ExperimentSpec spec = tiny_spec(dir.path.string());
  const RunSummary summary = run_convergence(spec);

  CHECK(fs::exists(dir.path / "convergence_p1_raw.csv"));
  CHECK(fs::exists(dir.path / "convergence_p1_agg.csv"));
  CHECK(fs::exists(dir.path / "convergence_p1_agg.svg"));
  CHECK(fs::exists(dir.path / "manifest.txt"));
  CHECK(fs::exists(dir.path / "resolved_config.kv"));
  CHECK(fs::exists(dir.path / "report.txt"));

  // raw: header + alphas * seeds * evals rows
  CHECK(count_lines((dir.path / "convergence_p1_raw.csv").string()) == 1 + 2 * 3 * 25);
  // aggregate: header + alphas * evals rows
  CHECK(count_lines((dir.path / "convergence_p1_agg.csv").string()) == 1 + 2 * 25);
  CHECK_FALSE(summary.report.empty());

  const std::string manifest = read_text_file((dir.path / "manifest.txt").string());
  CHECK(manifest.find("spec_hash") != std::string::npos);
  CHECK(manifest.find("library_version") != std::string::npos);
}

TEST_CASE("reruns from the resolved config are byte-identical") {
  TempDir dir("vqgap_repro_test");
  ExperimentSpec spec = tiny_spec((dir.path / "a").string());
  run_convergence(spec);

  // rerun from the emitted config, pointing at a fresh directory
  KvFile kv = KvFile::load((dir.path / "a" / "resolved_config.kv").string());
  kv.set("out_dir", (dir.path / "b").string());
  ExperimentSpec again = experiment_from_kv(kv);
  run_convergence(again);

  for (const char* name : {"convergence_p1_raw.csv", "convergence_p1_agg.csv",
                           "convergence_p1_agg.svg", "report.txt"}) {
    CHECK(read_text_file((dir.path / "a" / name).string()) ==
          read_text_file((dir.path / "b" / name).string()));
  }
}

TEST_CASE("worker count does not change results") {
  TempDir dir("vqgap_jobs_test");
  ExperimentSpec one = tiny_spec((dir.path / "j1").string());
  one.jobs = 1;
  ExperimentSpec two = tiny_spec((dir.path / "j2").string());
  two.jobs = 2;
  run_convergence(one);
  run_convergence(two);
  CHECK(read_text_file((dir.path / "j1" / "convergence_p1_raw.csv").string()) ==
        read_text_file((dir.path / "j2" / "convergence_p1_raw.csv").string()));
}

TEST_CASE("qubit sweep emits one row per point with the optimum on top") {
  TempDir dir("vqgap_qsweep_test");
  ExperimentSpec spec = tiny_spec(dir.path.string());
  spec.mode = ExperimentMode::QubitSweep;
  spec.qubit_counts = {2, 4, 6};
  spec.seeds = {1, 2};
  const RunSummary summary = run_qubit_sweep(spec);

  const std::string csv_path = (dir.path / "sweep_qubits.csv").string();
  REQUIRE(fs::exists(csv_path));
  CHECK(count_lines(csv_path) == 1 + 3);

  std::ifstream in(csv_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "qubits,n_avs,n_bs,z_opt,z_greedy,z_vqe_a0.25,z_vqe_a1");
  std::string line;
  while (std::getline(in, line)) {
    const auto cells = vqgap::detail::split(line, ',');
    REQUIRE(cells.size() == 7);
    const double z_opt = std::stod(cells[3]);
    for (std::size_t c = 4; c < cells.size(); ++c) {
      const double v = std::stod(cells[c]);
      if (std::isfinite(v)) CHECK(v <= z_opt + 1e-9);
    }
  }
  CHECK(fs::exists(dir.path / "sweep_qubits.svg"));
  (void)summary;
}

TEST_CASE("qubit sweep skips points it cannot factor") {
  TempDir dir("vqgap_qskip_test");
  ExperimentSpec spec = tiny_spec(dir.path.string());
  spec.mode = ExperimentMode::QubitSweep;
  spec.qubit_counts = {2, 0, 30};
  spec.seeds = {1};
  const RunSummary summary = run_qubit_sweep(spec);
  CHECK(count_lines((dir.path / "sweep_qubits.csv").string()) == 1 + 1);
  std::size_t notices = 0;
  for (const auto& line : summary.report)
    if (line.find("skipped") != std::string::npos) ++notices;
  CHECK(notices == 2);
}

TEST_CASE("bs sweep rows react to prior associations") {
  TempDir dir("vqgap_bsweep_test");
  ExperimentSpec spec = tiny_spec((dir.path / "noprior").string());
  spec.mode = ExperimentMode::BsSweep;
  spec.bs_counts = {2, 3};
  spec.seeds = {1};
  spec.vnet.n_avs = 2;
  run_bs_sweep(spec);
  CHECK(count_lines((dir.path / "noprior" / "sweep_bs.csv").string()) == 1 + 2);

  // with a max-SINR prior, switching away from it costs (1 - mu): WR shrinks
  ExperimentSpec withprior = spec;
  withprior.out_dir = (dir.path / "prior").string();
  withprior.use_prior = true;
  run_bs_sweep(withprior);

  const VNetConfig vnet = [&] {
    VNetConfig v = spec.vnet;
    v.n_rbs = 2;
    v.n_tbs = 1;
    v.gamma_th = -50.0;  // keep cross links admissible so the penalty is visible
    return v;
  }();
  Scenario plain = generate_scenario(vnet, spec.scenario_seed);
  const WeightedRateMatrix wr_plain = weighted_rate_matrix(plain, spec.normalize);
  plain.prior_association = attach_max_sinr(plain);
  const WeightedRateMatrix wr_prior = weighted_rate_matrix(plain, spec.normalize);
  bool some_smaller = false;
  for (std::size_t k = 0; k < wr_plain.wr.size(); ++k) {
    CHECK(wr_prior.wr[k] <= wr_plain.wr[k] + 1e-12);
    if (wr_prior.wr[k] < wr_plain.wr[k] - 1e-12) some_smaller = true;
  }
  CHECK(some_smaller);
}

TEST_CASE("depth sweep covers the degenerate product-state ansatz") {
  TempDir dir("vqgap_dsweep_test");
  ExperimentSpec spec = tiny_spec(dir.path.string());
  spec.mode = ExperimentMode::DepthSweep;
  spec.depths = {0, 1};
  spec.seeds = {1, 2};
  run_depth_sweep(spec);
  const std::string csv = read_text_file((dir.path / "sweep_depth.csv").string());
  CHECK(count_lines((dir.path / "sweep_depth.csv").string()) == 1 + 2);
  CHECK(csv.rfind("depth,", 0) == 0);
}

TEST_CASE("single mode writes the canonical trace and instance files") {
  TempDir dir("vqgap_single_test");
  ExperimentSpec spec = tiny_spec(dir.path.string());
  spec.mode = ExperimentMode::Single;
  const RunSummary summary = run_single(spec);
  CHECK(fs::exists(dir.path / "solve_trace.csv"));
  CHECK(fs::exists(dir.path / "instance.json"));
  CHECK(fs::exists(dir.path / "wr_matrix.csv"));
  const std::string trace = read_text_file((dir.path / "solve_trace.csv").string());
  CHECK(trace.rfind("eval,cvar,mean_energy,best_energy,best_bits,ground_prob\n", 0) == 0);
  CHECK_FALSE(summary.report.empty());

  // the emitted instance feeds back into a solve
  ExperimentSpec from_file = tiny_spec((dir.path / "again").string());
  from_file.mode = ExperimentMode::Single;
  from_file.instance_file = (dir.path / "instance.json").string();
  const RunSummary second = run_single(from_file);
  CHECK(fs::exists(dir.path / "again" / "solve_trace.csv"));
  (void)second;
}

TEST_CASE("plots are derived from summary CSV files") {
  TempDir dir("vqgap_plot_test");
  const std::string csv_path = (dir.path / "sweep_depth.csv").string();
  const std::string svg_path = (dir.path / "sweep_depth.svg").string();

  write_text_file(csv_path,
                  "depth,n_avs,n_bs,z_opt,z_greedy,z_vqe_a0.25\n"
                  "1,2,2,10,9,9.5\n"
                  "2,2,2,10,9,9.1\n");
  emit_plot(csv_path, svg_path);
  REQUIRE(fs::exists(svg_path));
  const std::string first = read_text_file(svg_path);
  emit_plot(csv_path, svg_path);
  CHECK(read_text_file(svg_path) == first);  // identical bytes for identical input

  // header-only CSV: error, no file written
  const std::string empty_csv = (dir.path / "empty.csv").string();
  write_text_file(empty_csv, "depth,n_avs,n_bs,z_opt\n");
  CHECK_THROWS_AS(emit_plot(empty_csv, (dir.path / "empty.svg").string()), std::runtime_error);
  CHECK_FALSE(fs::exists(dir.path / "empty.svg"));

  // missing input file
  CHECK_THROWS_AS(emit_plot((dir.path / "nope.csv").string(), svg_path), std::runtime_error);

  // convergence aggregates group by alpha
  const std::string agg_path = (dir.path / "agg.csv").string();
  write_text_file(agg_path,
                  "alpha,eval,cvar_med,cvar_q25,cvar_q75,best_z_med,best_z_q25,best_z_q75,z_opt\n"
                  "0.25,0,1,1,1,nan,nan,nan,8\n"
                  "0.25,1,0.5,0.5,0.5,7,7,7,8\n"
                  "1,0,2,2,2,6,6,6,8\n"
                  "1,1,1.5,1.5,1.5,7.5,7.5,7.5,8\n");
  emit_plot(agg_path, (dir.path / "agg.svg").string());
  const std::string svg = read_text_file((dir.path / "agg.svg").string());
  CHECK(svg.find("alpha=0.25") != std::string::npos);
  CHECK(svg.find("alpha=1") != std::string::npos);
  CHECK(svg.find("optimal") != std::string::npos);
}

TEST_CASE("experiment validation rejects empty plans") {
  ExperimentSpec spec = tiny_spec("x");
  spec.alphas.clear();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = tiny_spec("x");
  spec.seeds.clear();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = tiny_spec("x");
  spec.alphas = {1.5};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
