#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lsqtl::cli {

struct IntervalArgs {
  std::optional<double> r;
  std::optional<double> d;
};

struct CritvalArgs {
  IntervalArgs interval;
  std::string kind = "full";
  std::vector<double> alphas{0.05};
  std::size_t reps = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string table_out;  // optional CSV dump of the sampled table
};

struct TestArgs {
  std::string input;
  std::string kernel = "normal";
  IntervalArgs interval;
  std::string method = "lrt";  // lrt | ks | ad
  bool equal_scale = false;
  bool davies = false;
  std::size_t reps = 100000;
  std::uint64_t seed = 1;
  std::string out = "json";
  unsigned workers = 0;
};

struct ScanArgs {
  std::string map;
  std::string geno;
  std::string pheno;
  std::string kernel = "normal";
  bool nonparam = false;
  bool normality = false;
  std::size_t reps = 100000;
  std::size_t nonparam_reps = 10000;
  std::uint64_t seed = 1;
  std::string out;
  unsigned workers = 0;
};

struct SimulateArgs {
  std::string config;
  std::string out;
  std::string manifest;  // defaults to <out stem>.manifest.json
  bool full_budget = false;
  unsigned workers = 0;
};

struct SimDataArgs {
  int markers = 5;
  double spacing_cm = 10.0;
  int n = 200;
  std::string kernel = "normal";
  std::optional<std::size_t> qtl_interval;
  double qtl_theta = 0.5;
  double f2_mu = 1.0;
  double f2_sigma = 1.5;
  std::uint64_t seed = 1;
  std::string prefix;
};

struct KlArgs {
  std::string config;
};

// Each returns the process exit code; results go to `out`, notes to `log`.
int run_critval(const CritvalArgs& args, std::ostream& out, std::ostream& log);
int run_test(const TestArgs& args, std::ostream& out, std::ostream& log);
int run_scan(const ScanArgs& args, std::ostream& out, std::ostream& log);
int run_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& log);
int run_simdata(const SimDataArgs& args, std::ostream& out, std::ostream& log);
int run_kl(const KlArgs& args, std::ostream& out, std::ostream& log);

}  // namespace lsqtl::cli
