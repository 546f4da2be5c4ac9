#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>

#include "config.hpp"
#include "json.hpp"
#include "lsqtl/asymptotics.hpp"
#include "lsqtl/csv.hpp"
#include "lsqtl/error.hpp"
#include "lsqtl/lrt.hpp"
#include "lsqtl/nonparam.hpp"
#include "lsqtl/scan.hpp"
#include "lsqtl/simharness.hpp"

namespace lsqtl::cli {

namespace {

using csv::format_double;

unsigned workers_or_default(unsigned w) { return w == 0 ? default_workers() : w; }

IntervalConfig to_interval(const IntervalArgs& a) {
  if (a.r.has_value() == a.d.has_value()) throw InvalidInput("give exactly one of --r and --d");
  return a.r ? IntervalConfig::from_r(*a.r) : IntervalConfig::from_distance(*a.d);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

std::string csv_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

// k-sample KS or AD with a p-value from the permutation null for the
// observed group sizes.
int run_rank_test(const TestArgs& a, const PhenotypeGroups& groups, std::ostream& out) {
  const bool ks = a.method == "ks";
  const double stat = ks ? ks_ksample(groups) : ad_ksample(groups);
  const std::array<std::size_t, 4> sizes{groups.size(1), groups.size(2), groups.size(3),
                                         groups.size(4)};
  const RankNull null = rank_null_statistics(sizes, a.reps, a.seed, workers_or_default(a.workers));
  const std::vector<double>& values = ks ? null.ks : null.ad;
  const auto ge = values.end() - std::lower_bound(values.begin(), values.end(), stat);
  const double p = (1.0 + static_cast<double>(ge)) / (static_cast<double>(values.size()) + 1.0);
  if (a.out == "json") {
    out << nlohmann::json{{"statistic", stat}, {"kind", a.method}, {"p_value_mc", p},
                          {"null_reps", values.size()}}
               .dump()
        << '\n';
  } else {
    out << "statistic,kind,p_value_mc,null_reps\n"
        << format_double(stat) << ',' << a.method << ',' << format_double(p) << ','
        << values.size() << '\n';
  }
  return 0;
}

}  // namespace

int run_critval(const CritvalArgs& a, std::ostream& out, std::ostream& log) {
  const IntervalConfig interval = to_interval(a.interval);
  const StatKind kind = stat_kind_from_name(a.kind);
  for (double alpha : a.alphas) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  }
  const NullDistTable table = sample_representation(interval.r, kind, a.reps, a.seed,
                                                    workers_or_default(a.workers));
  out << "r,kind,alpha,critical_value,samples,seed\n";
  for (double alpha : a.alphas) {
    out << format_double(interval.r) << ',' << to_string(kind) << ',' << format_double(alpha)
        << ',' << format_double(critical_value(table, alpha)) << ',' << table.size() << ','
        << a.seed << '\n';
  }
  if (!a.table_out.empty()) {
    write_table(table, a.table_out);
    log << "table written to " << a.table_out << " (sidecar " << sidecar_path(a.table_out).string()
        << ")\n";
  }
  return 0;
}

int run_test(const TestArgs& a, std::ostream& out, std::ostream&) {
  if (a.out != "json" && a.out != "csv") throw InvalidInput("--out must be json or csv");
  const IntervalConfig interval = to_interval(a.interval);
  const Kernel kernel = Kernel::from_name(a.kernel);
  const PhenotypeGroups groups = load_groups_csv(a.input);
  if (a.method != "lrt") return run_rank_test(a, groups, out);
  const StatKind kind = a.equal_scale ? StatKind::star : StatKind::full;
  const NullDistTable table =
      sample_representation(interval.r, kind, a.reps, a.seed, workers_or_default(a.workers));
  const TestOptions opts{a.davies};
  const FitConfig fit;
  const TestOutcome o = a.equal_scale ? lrt_equal_scale(groups, kernel, interval, fit, table, opts)
                                      : lrt_full(groups, kernel, interval, fit, table, opts);
  if (a.out == "json") {
    out << to_json(o) << '\n';
    return 0;
  }
  const MixtureParams& p = o.fit.params;
  out << "statistic,kind,p_value_rep,p_value_davies,theta_hat,mu1,mu2,sigma1,sigma2,mu0,sigma0,"
         "converged\n"
      << format_double(o.statistic) << ',' << to_string(o.kind) << ','
      << format_double(o.p_value_rep) << ',' << csv_optional(o.p_value_davies) << ','
      << format_double(o.theta_hat) << ',' << format_double(p.comp1.mu) << ','
      << format_double(p.comp2.mu) << ',' << format_double(p.comp1.sigma) << ','
      << format_double(p.comp2.sigma) << ',' << format_double(o.null_fit.params.comp1.mu) << ','
      << format_double(o.null_fit.params.comp1.sigma) << ','
      << (o.fit.converged ? "true" : "false") << '\n';
  return 0;
}

int run_scan(const ScanArgs& a, std::ostream&, std::ostream& log) {
  const ScanDataset data = load_dataset(a.map, a.geno, a.pheno);
  if (data.dropped_without_phenotype > 0) {
    log << "warning: dropped " << data.dropped_without_phenotype
        << " genotyped individuals without a phenotype\n";
  }
  ScanOptions opts;
  opts.kernel = Kernel::from_name(a.kernel);
  opts.n_null = a.reps;
  opts.nonparam = a.nonparam;
  opts.nonparam_reps = a.nonparam_reps;
  opts.normality = a.normality;
  opts.seed = a.seed;
  opts.workers = workers_or_default(a.workers);
  const std::vector<IntervalResult> rows = scan(data, opts);
  std::ofstream out = open_out(a.out);
  write_scan_csv(out, rows);
  std::size_t skipped = 0;
  for (const IntervalResult& row : rows) skipped += row.error.empty() ? 0 : 1;
  log << rows.size() << " intervals scanned, " << skipped << " not tested; results in " << a.out
      << '\n';
  return 0;
}

int run_simulate(const SimulateArgs& a, std::ostream&, std::ostream& log) {
  SimConfig cfg = load_sim_config(a.config, a.full_budget);
  if (a.workers > 0) cfg.calibration.workers = a.workers;
  const auto start = std::chrono::steady_clock::now();

  std::vector<ExperimentRow> rows;
  for (const SimScenario& s : cfg.scenarios) {
    switch (cfg.experiment) {
      case Experiment::type1:
        rows.push_back(type1_experiment(s, cfg.methods, cfg.fit, cfg.calibration));
        break;
      case Experiment::power:
        rows.push_back(power_experiment(s, cfg.methods, cfg.fit, cfg.calibration));
        break;
      case Experiment::asymptotic:
        rows.push_back(asymptotic_experiment(s, cfg.methods, cfg.fit, cfg.calibration));
        break;
    }
    log << "n=" << s.n << " done\n";
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  {
    std::ofstream out = open_out(a.out);
    write_rows_csv(out, rows);
  }

  nlohmann::json scenarios = nlohmann::json::array();
  for (const ExperimentRow& row : rows) {
    scenarios.push_back({{"n", row.scenario.n},
                         {"seed", row.scenario.seed},
                         {"reps", row.reps},
                         {"failures", row.failures},
                         {"nonconverged", row.nonconverged},
                         {"size_redraws", row.size_redraws}});
  }
  const nlohmann::json manifest{
      {"tool", "lsqtl"},
      {"version", LSQTL_VERSION},
      {"experiment", std::string(to_string(cfg.experiment))},
      {"config_file", a.config},
      {"config", cfg.echo},
      {"full_budget", a.full_budget},
      {"budgets",
       {{"reps", cfg.scenarios.front().n_reps},
        {"table_samples", cfg.calibration.table_samples},
        {"null_reps", cfg.calibration.null_reps}}},
      {"fit",
       {{"theta_grid_size", cfg.fit.theta_grid_size},
        {"em_max_iter", cfg.fit.em_max_iter},
        {"em_tol", cfg.fit.em_tol},
        {"sigma_floor_factor", cfg.fit.sigma_floor_factor},
        {"closed_form_normal", cfg.fit.closed_form_normal}}},
      {"scenarios", scenarios},
      {"workers", cfg.calibration.workers},
      {"elapsed_seconds", elapsed},
      {"rows_csv", a.out}};
  std::filesystem::path manifest_path = a.manifest;
  if (manifest_path.empty()) {
    manifest_path = std::filesystem::path(a.out).replace_extension(".manifest.json");
  }
  std::ofstream mout = open_out(manifest_path);
  mout << manifest.dump(2) << '\n';
  log << "rows in " << a.out << ", manifest in " << manifest_path.string() << '\n';
  return 0;
}

int run_simdata(const SimDataArgs& a, std::ostream&, std::ostream& log) {
  std::vector<Marker> markers;
  for (int i = 0; i < a.markers; ++i) {
    markers.push_back({"M" + std::to_string(i + 1), a.spacing_cm * i});
  }
  const Kernel kernel = Kernel::from_name(a.kernel);
  std::optional<PlantedQtl> qtl;
  if (a.qtl_interval) qtl = PlantedQtl{*a.qtl_interval, a.qtl_theta, {kernel, {a.f2_mu, a.f2_sigma}}};
  const ScanDataset data = simulate_dataset(markers, a.n, {kernel, {0.0, 1.0}}, qtl, a.seed);
  const std::string map = a.prefix + "_map.csv";
  const std::string geno = a.prefix + "_geno.csv";
  const std::string pheno = a.prefix + "_pheno.csv";
  write_dataset(data, map, geno, pheno);
  log << "wrote " << map << ", " << geno << ", " << pheno << '\n';
  return 0;
}

int run_kl(const KlArgs& a, std::ostream& out, std::ostream&) {
  const KlConfig cfg = load_kl_config(a.config);
  const KlResult kl = kl_information(group_probabilities(cfg.interval.r), cfg.f1, cfg.f2,
                                     cfg.theta, cfg.null_kernel);
  const nlohmann::json j{{"kl", kl.kl},
                         {"kl_x100", 100.0 * kl.kl},
                         {"r", cfg.interval.r},
                         {"theta", cfg.theta},
                         {"null_kernel", std::string(cfg.null_kernel.name())},
                         {"mu0", kl.null_params.mu},
                         {"sigma0", kl.null_params.sigma},
                         {"iterations", kl.iterations}};
  out << j.dump(2) << '\n';
  return 0;
}

}  // namespace lsqtl::cli
