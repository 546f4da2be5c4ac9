#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "commands.hpp"
#include "lsqtl/error.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

void add_interval(CLI::App* cmd, lsqtl::cli::IntervalArgs& a) {
  auto* group = cmd->add_option_group("interval", "Exactly one of --r and --d");
  group->add_option("--r", a.r, "Recombination fraction of the interval");
  group->add_option("--d", a.d, "Interval length in cM (Haldane map)");
  group->require_option(1);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lsqtl::cli;
  CLI::App app{"Likelihood ratio tests for location-scale QTL effects"};
  app.set_version_flag("--version", LSQTL_VERSION);
  app.require_subcommand(1);

  CritvalArgs crit;
  auto* c = app.add_subcommand("critval", "Critical values of the limiting null laws");
  add_interval(c, crit.interval);
  c->add_option("--kind", crit.kind, "full or star")->check(CLI::IsMember({"full", "star"}));
  c->add_option("--alpha", crit.alphas, "Levels, comma separated")->delimiter(',');
  c->add_option("--reps", crit.reps, "Monte Carlo samples")->check(CLI::PositiveNumber);
  c->add_option("--seed", crit.seed);
  c->add_option("--workers", crit.workers, "Threads, 0 = all cores");
  c->add_option("--table", crit.table_out, "Also write the sampled table to this CSV");

  TestArgs test;
  auto* t = app.add_subcommand("test", "Likelihood ratio test on one interval");
  t->add_option("--input", test.input, "Groups CSV (group,phenotype)")->required();
  t->add_option("--kernel", test.kernel)->check(CLI::IsMember({"normal", "logistic"}));
  add_interval(t, test.interval);
  t->add_option("--method", test.method, "lrt, or the k-sample ks / ad tests")
      ->check(CLI::IsMember({"lrt", "ks", "ad"}));
  t->add_flag("--equal-scale", test.equal_scale, "Test location only (R_n*)");
  t->add_flag("--davies", test.davies, "Also report the Davies p-value");
  t->add_option("--reps", test.reps, "Null table size (>= 10000)");
  t->add_option("--seed", test.seed);
  t->add_option("--out", test.out, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  t->add_option("--workers", test.workers);

  ScanArgs sc;
  auto* s = app.add_subcommand("scan", "Interval scan over a marker map");
  s->add_option("--map", sc.map)->required()->check(CLI::ExistingFile);
  s->add_option("--geno", sc.geno)->required()->check(CLI::ExistingFile);
  s->add_option("--pheno", sc.pheno)->required()->check(CLI::ExistingFile);
  s->add_option("--kernel", sc.kernel)->check(CLI::IsMember({"normal", "logistic"}));
  s->add_flag("--nonparam", sc.nonparam, "Add k-sample KS and AD p-values");
  s->add_flag("--normality", sc.normality, "One-sample KS normality of groups 1 and 4");
  s->add_option("--reps", sc.reps, "Null table size per interval");
  s->add_option("--nonparam-reps", sc.nonparam_reps, "Null datasets for KS/AD");
  s->add_option("--seed", sc.seed);
  s->add_option("--out", sc.out, "Results CSV")->required();
  s->add_option("--workers", sc.workers);

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "Type I / power experiment from a TOML file");
  m->add_option("--config", sim.config)->required()->check(CLI::ExistingFile);
  m->add_option("--out", sim.out, "Rows CSV")->required();
  m->add_option("--manifest", sim.manifest, "Manifest JSON path");
  m->add_flag("--full-budget", sim.full_budget, "10,000 replicates and null datasets");
  m->add_option("--workers", sim.workers);

  SimDataArgs sd;
  auto* g = app.add_subcommand("simdata", "Write a simulated backcross dataset (map, geno, pheno)");
  g->add_option("--markers", sd.markers, "Number of markers")->check(CLI::Range(2, 100000));
  g->add_option("--spacing", sd.spacing_cm, "Marker spacing in cM")->check(CLI::PositiveNumber);
  g->add_option("--n", sd.n, "Individuals")->check(CLI::PositiveNumber);
  g->add_option("--kernel", sd.kernel)->check(CLI::IsMember({"normal", "logistic"}));
  g->add_option("--qtl-interval", sd.qtl_interval, "Interval index holding a QTL");
  g->add_option("--qtl-theta", sd.qtl_theta, "QTL position within the interval");
  g->add_option("--f2-mu", sd.f2_mu, "Location under the heterozygous QTL genotype");
  g->add_option("--f2-sigma", sd.f2_sigma, "Scale under the heterozygous QTL genotype");
  g->add_option("--seed", sd.seed);
  g->add_option("--prefix", sd.prefix, "Output prefix for <prefix>_map.csv etc.")->required();

  KlArgs kl;
  auto* k = app.add_subcommand("kl", "KL information of an alternative");
  k->add_option("--config", kl.config)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (c->parsed()) return run_critval(crit, std::cout, std::cerr);
    if (t->parsed()) return run_test(test, std::cout, std::cerr);
    if (s->parsed()) return run_scan(sc, std::cout, std::cerr);
    if (m->parsed()) return run_simulate(sim, std::cout, std::cerr);
    if (g->parsed()) return run_simdata(sd, std::cout, std::cerr);
    if (k->parsed()) return run_kl(kl, std::cout, std::cerr);
  } catch (const lsqtl::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
