#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lsqtl/asymptotics.hpp"
#include "lsqtl/estimate.hpp"
#include "lsqtl/likelihood.hpp"
#include "lsqtl/parallel.hpp"

namespace lsqtl {

/// Groups CSV: header `group,phenotype`, group in 1..4, one row per
/// observation.
PhenotypeGroups read_groups_csv(std::istream& in);
PhenotypeGroups load_groups_csv(const std::filesystem::path& path);
void write_groups_csv(std::ostream& out, const PhenotypeGroups& groups);

struct Marker {
  std::string name;
  double position_cm = 0.0;
};

/// Genotype codes: 1 homozygote, 0 heterozygote, -1 missing.
inline constexpr std::int8_t kMissingGenotype = -1;

struct ScanDataset {
  std::vector<Marker> markers;                    // strictly increasing positions
  std::vector<std::string> ids;                   // individuals with a phenotype
  std::vector<std::vector<std::int8_t>> genotypes;  // [individual][marker]
  std::vector<double> phenotypes;                 // aligned with ids
  std::size_t dropped_without_phenotype = 0;

  std::size_t intervals() const { return markers.empty() ? 0 : markers.size() - 1; }
  void validate() const;  // throws ValidationError
};

/// Map CSV `marker,position_cM`; genotype CSV `id,<marker names>` with cells
/// 0, 1 or NA; phenotype CSV `id,value`. Genotyped individuals without a
/// phenotype are dropped and counted.
ScanDataset load_dataset(const std::filesystem::path& map_path,
                         const std::filesystem::path& geno_path,
                         const std::filesystem::path& pheno_path);
ScanDataset read_dataset(std::istream& map, std::istream& geno, std::istream& pheno);
void write_dataset(const ScanDataset& data, const std::filesystem::path& map_path,
                   const std::filesystem::path& geno_path,
                   const std::filesystem::path& pheno_path);

/// Groups for the interval between markers `index` and `index + 1`:
/// (1,1) -> 1, (1,0) -> 2, (0,1) -> 3, (0,0) -> 4; individuals missing
/// either flanking genotype are left out.
struct IntervalGroups {
  std::array<std::vector<double>, 4> values;
  IntervalConfig interval;

  std::array<std::size_t, 4> sizes() const;
  bool testable() const;  // n1 >= 2 and n4 >= 2
  PhenotypeGroups groups() const;
};
IntervalGroups interval_groups(const ScanDataset& data, std::size_t index);

/// Thread-safe cache of representation tables keyed by (kind, r rounded to
/// four decimals). Tables are built at the rounded r with a seed derived from
/// the key, so cached and fresh tables are identical.
class NullTableCache {
 public:
  NullTableCache(std::size_t n_samples, std::uint64_t seed, unsigned workers = default_workers());

  std::shared_ptr<const NullDistTable> get(double r, StatKind kind);
  std::size_t size() const;

  static long long key_of(double r);

 private:
  std::size_t n_samples_;
  std::uint64_t seed_;
  unsigned workers_;
  mutable std::mutex mutex_;
  std::map<std::pair<long long, int>, std::shared_ptr<const NullDistTable>> tables_;
};

struct ScanOptions {
  Kernel kernel = kNormal;
  FitConfig fit;
  std::size_t n_null = 100000;
  bool nonparam = false;
  std::size_t nonparam_reps = 10000;
  bool normality = false;
  std::uint64_t seed = 1;
  unsigned workers = default_workers();
};

struct IntervalResult {
  std::string left_marker;
  std::string right_marker;
  double r = 0.0;
  std::array<std::size_t, 4> n{};
  bool testable = false;
  std::string error;  // empty when the interval was tested
  double R_n = 0.0;
  double p_R = 1.0;
  double R_n_star = 0.0;
  double p_Rstar = 1.0;
  double theta_hat = 0.0;
  bool converged = false;
  std::optional<double> ks_p;
  std::optional<double> ad_p;
  std::optional<double> normality_p_g1;
  std::optional<double> normality_p_g4;
};

std::vector<IntervalResult> scan(const ScanDataset& data, const ScanOptions& opts,
                                 NullTableCache* cache = nullptr);

void write_scan_csv(std::ostream& out, const std::vector<IntervalResult>& rows);

/// Backcross simulation along one chromosome: marker genotypes follow a
/// Markov chain with Haldane recombination between neighbours. With a QTL in
/// interval `qtl.interval`, individuals carrying the homozygous QTL genotype
/// draw from f1 and the others from f2; theta is placed so that group 2 is
/// approximately theta f1 + (1 - theta) f2. Without a QTL everyone draws
/// from f1.
struct PlantedQtl {
  std::size_t interval = 0;
  double theta = 0.5;
  Component f2;
};
ScanDataset simulate_dataset(const std::vector<Marker>& markers, int n, const Component& f1,
                             const std::optional<PlantedQtl>& qtl, std::uint64_t seed);

}  // namespace lsqtl
