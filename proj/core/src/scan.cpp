#include "lsqtl/scan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "lsqtl/csv.hpp"
#include "lsqtl/error.hpp"
#include "lsqtl/lrt.hpp"
#include "lsqtl/nonparam.hpp"
#include "lsqtl/rng.hpp"

namespace lsqtl {

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return in;
}

std::ofstream create_or_throw(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

template <class Fn>
auto with_file_context(std::string_view what, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw ParseError(std::string(what) + ": " + e.what(), 0);
  }
}

std::int8_t parse_genotype(const std::string& cell, std::size_t line, const std::string& marker) {
  if (cell == "1") return 1;
  if (cell == "0") return 0;
  if (cell == "NA") return kMissingGenotype;
  throw ParseError("genotype '" + cell + "' for marker " + marker + " (expected 0, 1 or NA)",
                   line);
}

std::uint64_t interval_seed(std::uint64_t seed, std::size_t index) {
  return mix64(seed ^ mix64(0x5CA7ULL + index));
}

double rank_pvalue(const std::vector<double>& sorted, double stat) {
  const auto first = std::lower_bound(sorted.begin(), sorted.end(), stat);
  return (1.0 + static_cast<double>(sorted.end() - first)) /
         (static_cast<double>(sorted.size()) + 1.0);
}

}  // namespace

PhenotypeGroups read_groups_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  const std::size_t gcol = table.column("group");
  const std::size_t pcol = table.column("phenotype");
  std::array<std::vector<double>, 4> g;
  for (const auto& row : table.rows) {
    const long long group = csv::parse_int(row.fields[gcol], row.line, "group");
    if (group < 1 || group > 4) {
      throw ParseError("group must be 1, 2, 3 or 4, got " + row.fields[gcol], row.line);
    }
    g[static_cast<std::size_t>(group - 1)].push_back(
        csv::parse_double(row.fields[pcol], row.line, "phenotype"));
  }
  return PhenotypeGroups(std::move(g[0]), std::move(g[1]), std::move(g[2]), std::move(g[3]));
}

PhenotypeGroups load_groups_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return with_file_context(path.string(), [&] { return read_groups_csv(in); });
}

void write_groups_csv(std::ostream& out, const PhenotypeGroups& groups) {
  out << "group,phenotype\n";
  for (int i = 1; i <= 4; ++i) {
    for (double v : groups.group(i)) out << i << ',' << csv::format_double(v) << '\n';
  }
}

void ScanDataset::validate() const {
  if (markers.size() < 2) throw ValidationError("a scan needs at least two markers");
  std::set<std::string> names;
  for (std::size_t i = 0; i < markers.size(); ++i) {
    if (!names.insert(markers[i].name).second) {
      throw ValidationError("duplicate marker name " + markers[i].name);
    }
    if (i > 0 && !(markers[i].position_cm > markers[i - 1].position_cm)) {
      throw ValidationError("marker positions must be strictly increasing (" +
                            markers[i - 1].name + " then " + markers[i].name + ")");
    }
  }
  if (ids.size() != genotypes.size() || ids.size() != phenotypes.size()) {
    throw ValidationError("genotype and phenotype rows are not aligned");
  }
  for (const auto& row : genotypes) {
    if (row.size() != markers.size()) throw ValidationError("genotype row has wrong width");
  }
}

ScanDataset read_dataset(std::istream& map, std::istream& geno, std::istream& pheno) {
  ScanDataset data;
  const csv::Table map_table = with_file_context("map", [&] { return csv::read(map); });
  const csv::Table geno_table = with_file_context("genotypes", [&] { return csv::read(geno); });
  const csv::Table pheno_table = with_file_context("phenotypes", [&] { return csv::read(pheno); });

  with_file_context("map", [&] {
    const std::size_t ncol = map_table.column("marker");
    const std::size_t pcol = map_table.column("position_cM");
    for (const auto& row : map_table.rows) {
      data.markers.push_back(
          {row.fields[ncol], csv::parse_double(row.fields[pcol], row.line, "position_cM")});
    }
    return 0;
  });

  std::unordered_map<std::string, double> phenotype_of;
  with_file_context("phenotypes", [&] {
    const std::size_t icol = pheno_table.column("id");
    const std::size_t vcol = pheno_table.column("value");
    for (const auto& row : pheno_table.rows) {
      const double v = csv::parse_double(row.fields[vcol], row.line, "phenotype value");
      if (!phenotype_of.emplace(row.fields[icol], v).second) {
        throw ParseError("duplicate id " + row.fields[icol], row.line);
      }
    }
    return 0;
  });

  with_file_context("genotypes", [&] {
    const std::size_t icol = geno_table.column("id");
    std::vector<std::size_t> cols;
    for (const Marker& m : data.markers) cols.push_back(geno_table.column(m.name));
    std::set<std::string> seen;
    for (const auto& row : geno_table.rows) {
      const std::string& id = row.fields[icol];
      if (!seen.insert(id).second) throw ParseError("duplicate id " + id, row.line);
      std::vector<std::int8_t> g;
      g.reserve(cols.size());
      for (std::size_t m = 0; m < cols.size(); ++m) {
        g.push_back(parse_genotype(row.fields[cols[m]], row.line, data.markers[m].name));
      }
      const auto it = phenotype_of.find(id);
      if (it == phenotype_of.end()) {
        ++data.dropped_without_phenotype;
        continue;
      }
      data.ids.push_back(id);
      data.genotypes.push_back(std::move(g));
      data.phenotypes.push_back(it->second);
    }
    return 0;
  });
  data.validate();
  return data;
}

ScanDataset load_dataset(const std::filesystem::path& map_path,
                         const std::filesystem::path& geno_path,
                         const std::filesystem::path& pheno_path) {
  auto map = open_or_throw(map_path);
  auto geno = open_or_throw(geno_path);
  auto pheno = open_or_throw(pheno_path);
  return read_dataset(map, geno, pheno);
}

void write_dataset(const ScanDataset& data, const std::filesystem::path& map_path,
                   const std::filesystem::path& geno_path,
                   const std::filesystem::path& pheno_path) {
  data.validate();
  auto map = create_or_throw(map_path);
  map << "marker,position_cM\n";
  for (const Marker& m : data.markers) map << m.name << ',' << csv::format_double(m.position_cm) << '\n';
  auto geno = create_or_throw(geno_path);
  geno << "id";
  for (const Marker& m : data.markers) geno << ',' << m.name;
  geno << '\n';
  for (std::size_t i = 0; i < data.ids.size(); ++i) {
    geno << data.ids[i];
    for (std::int8_t g : data.genotypes[i]) {
      geno << ',' << (g == kMissingGenotype ? "NA" : (g == 1 ? "1" : "0"));
    }
    geno << '\n';
  }
  auto pheno = create_or_throw(pheno_path);
  pheno << "id,value\n";
  for (std::size_t i = 0; i < data.ids.size(); ++i) {
    pheno << data.ids[i] << ',' << csv::format_double(data.phenotypes[i]) << '\n';
  }
}

std::array<std::size_t, 4> IntervalGroups::sizes() const {
  return {values[0].size(), values[1].size(), values[2].size(), values[3].size()};
}

bool IntervalGroups::testable() const { return values[0].size() >= 2 && values[3].size() >= 2; }

PhenotypeGroups IntervalGroups::groups() const {
  return PhenotypeGroups(values[0], values[1], values[2], values[3]);
}

IntervalGroups interval_groups(const ScanDataset& data, std::size_t index) {
  if (index >= data.intervals()) {
    throw InvalidInput("interval index " + std::to_string(index) + " out of range");
  }
  IntervalGroups out;
  out.interval = IntervalConfig::from_distance(data.markers[index + 1].position_cm -
                                               data.markers[index].position_cm);
  for (std::size_t i = 0; i < data.ids.size(); ++i) {
    const std::int8_t left = data.genotypes[i][index];
    const std::int8_t right = data.genotypes[i][index + 1];
    if (left == kMissingGenotype || right == kMissingGenotype) continue;
    const std::size_t group = left == 1 ? (right == 1 ? 0 : 1) : (right == 1 ? 2 : 3);
    out.values[group].push_back(data.phenotypes[i]);
  }
  return out;
}

NullTableCache::NullTableCache(std::size_t n_samples, std::uint64_t seed, unsigned workers)
    : n_samples_(n_samples), seed_(seed), workers_(workers) {}

long long NullTableCache::key_of(double r) { return std::llround(r * 1e4); }

std::shared_ptr<const NullDistTable> NullTableCache::get(double r, StatKind kind) {
  const auto key = std::make_pair(key_of(r), static_cast<int>(kind));
  std::lock_guard lock(mutex_);
  auto it = tables_.find(key);
  if (it != tables_.end()) return it->second;
  const double rounded = static_cast<double>(key.first) / 1e4;
  if (!(rounded > 0.0 && rounded < 1.0)) {
    throw DomainError("r=" + std::to_string(r) + " rounds outside (0, 1)");
  }
  const std::uint64_t seed =
      mix64(seed_ ^ mix64(static_cast<std::uint64_t>(key.first) * 2 + static_cast<std::uint64_t>(key.second)));
  auto table = std::make_shared<const NullDistTable>(
      sample_representation(rounded, kind, n_samples_, seed, workers_));
  tables_.emplace(key, table);
  return table;
}

std::size_t NullTableCache::size() const {
  std::lock_guard lock(mutex_);
  return tables_.size();
}

std::vector<IntervalResult> scan(const ScanDataset& data, const ScanOptions& opts,
                                 NullTableCache* cache) {
  data.validate();
  opts.fit.validate();
  NullTableCache local(opts.n_null, opts.seed, opts.workers);
  if (cache == nullptr) cache = &local;

  const std::size_t count = data.intervals();
  std::vector<IntervalGroups> groups(count);
  std::vector<IntervalResult> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    groups[i] = interval_groups(data, i);
    IntervalResult& row = out[i];
    row.left_marker = data.markers[i].name;
    row.right_marker = data.markers[i + 1].name;
    row.r = groups[i].interval.r;
    row.n = groups[i].sizes();
    row.testable = groups[i].testable();
    if (!row.testable) {
      row.error = "untestable: n1=" + std::to_string(row.n[0]) + " n4=" + std::to_string(row.n[3]);
    } else {
      // Build tables up front so the per-interval work below only reads.
      cache->get(row.r, StatKind::full);
      cache->get(row.r, StatKind::star);
    }
  }

  parallel_for(count, opts.workers, [&](std::size_t i) {
    IntervalResult& row = out[i];
    if (!row.testable) return;
    try {
      const PhenotypeGroups g = groups[i].groups();
      IntervalConfig interval = groups[i].interval;
      const auto full_table = cache->get(row.r, StatKind::full);
      const auto star_table = cache->get(row.r, StatKind::star);
      const TestPair pair = lrt_both(g, opts.kernel, interval, opts.fit, *full_table, *star_table);
      row.R_n = pair.full.statistic;
      row.p_R = pair.full.p_value_rep;
      row.R_n_star = pair.equal_scale.statistic;
      row.p_Rstar = pair.equal_scale.p_value_rep;
      row.theta_hat = pair.full.theta_hat;
      row.converged = pair.full.fit.converged && pair.equal_scale.fit.converged;
      if (opts.normality) {
        for (int which : {1, 4}) {
          const auto y = g.group(which);
          const LocScale fit = fit_location_scale(kNormal, y);
          const double p = ks_one_sample_normal(y, fit.mu, fit.sigma).p_value;
          (which == 1 ? row.normality_p_g1 : row.normality_p_g4) = p;
        }
      }
      if (opts.nonparam) {
        const RankNull null = rank_null_statistics(row.n, opts.nonparam_reps,
                                                   interval_seed(opts.seed, i), 1);
        row.ks_p = rank_pvalue(null.ks, ks_ksample(g));
        row.ad_p = rank_pvalue(null.ad, ad_ksample(g));
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return out;
}

void write_scan_csv(std::ostream& out, const std::vector<IntervalResult>& rows) {
  using csv::format_double;
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  out << "left_marker,right_marker,r,n1,n2,n3,n4,testable,R_n,p_R,R_n_star,p_Rstar,theta_hat,"
         "converged,ks_p,ad_p,normality_p_g1,normality_p_g4,error\n";
  for (const IntervalResult& r : rows) {
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    const bool tested = r.testable && r.error.empty();
    out << r.left_marker << ',' << r.right_marker << ',' << format_double(r.r) << ',' << r.n[0]
        << ',' << r.n[1] << ',' << r.n[2] << ',' << r.n[3] << ',' << (r.testable ? 1 : 0) << ','
        << (tested ? format_double(r.R_n) : "") << ',' << (tested ? format_double(r.p_R) : "")
        << ',' << (tested ? format_double(r.R_n_star) : "") << ','
        << (tested ? format_double(r.p_Rstar) : "") << ','
        << (tested ? format_double(r.theta_hat) : "") << ',' << (r.converged ? 1 : 0) << ','
        << opt(r.ks_p) << ',' << opt(r.ad_p) << ',' << opt(r.normality_p_g1) << ','
        << opt(r.normality_p_g4) << ',' << error << '\n';
  }
}

ScanDataset simulate_dataset(const std::vector<Marker>& markers, int n, const Component& f1,
                             const std::optional<PlantedQtl>& qtl, std::uint64_t seed) {
  if (markers.size() < 2) throw InvalidInput("need at least two markers");
  if (n < 1) throw InvalidInput("n must be >= 1");
  if (qtl && qtl->interval + 1 >= markers.size()) throw InvalidInput("QTL interval out of range");
  ScanDataset data;
  data.markers = markers;
  std::vector<double> r(markers.size() - 1);
  for (std::size_t j = 0; j + 1 < markers.size(); ++j) {
    r[j] = haldane(markers[j + 1].position_cm - markers[j].position_cm);
  }
  for (int i = 0; i < n; ++i) {
    StreamRng rng(seed, static_cast<std::uint64_t>(i));
    std::vector<std::int8_t> g(markers.size());
    g[0] = rng.uniform() < 0.5 ? 1 : 0;
    bool qtl_homozygous = g[0] == 1;
    for (std::size_t j = 0; j + 1 < markers.size(); ++j) {
      if (qtl && qtl->interval == j) {
        // Split the interval at the QTL so that a (1,0) individual carries
        // the homozygous QTL genotype with probability about theta:
        // r2 = theta r towards the right marker, r1 from r = r1 + r2 - 2 r1 r2.
        const double r2 = qtl->theta * r[j];
        const double r1 = (r[j] - r2) / (1.0 - 2.0 * r2);
        const std::int8_t q = rng.uniform() < r1 ? 1 - g[j] : g[j];
        qtl_homozygous = q == 1;
        g[j + 1] = rng.uniform() < r2 ? 1 - q : q;
      } else {
        g[j + 1] = rng.uniform() < r[j] ? 1 - g[j] : g[j];
      }
    }
    const Component& c = (!qtl || qtl_homozygous) ? f1 : qtl->f2;
    data.ids.push_back("ind" + std::to_string(i + 1));
    data.genotypes.push_back(std::move(g));
    data.phenotypes.push_back(c.kernel.sample(rng, c.params));
  }
  data.validate();
  return data;
}

}  // namespace lsqtl
