#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lsqtl/likelihood.hpp"
#include "lsqtl/simharness.hpp"
#include "oracles.hpp"

namespace test_support {

inline lsqtl::PhenotypeGroups draw(std::uint64_t seed, int n, double r, lsqtl::Component f1,
                                   lsqtl::Component f2, double theta = 0.5) {
  lsqtl::SimScenario s;
  s.n = n;
  s.interval = lsqtl::IntervalConfig::from_r(r);
  s.theta = theta;
  s.f1 = f1;
  s.f2 = f2;
  lsqtl::StreamRng rng(seed, 0);
  return lsqtl::gen_data(s, rng);
}

inline lsqtl::PhenotypeGroups draw_null(std::uint64_t seed, int n, double r,
                                        lsqtl::Kernel k = lsqtl::kNormal) {
  return draw(seed, n, r, {k, {0.0, 1.0}}, {k, {0.0, 1.0}});
}

inline std::array<oracle::Sample, 4> arrays(const lsqtl::PhenotypeGroups& g) {
  std::array<oracle::Sample, 4> out;
  for (int i = 0; i < 4; ++i) out[i].assign(g.group(i + 1).begin(), g.group(i + 1).end());
  return out;
}

inline oracle::Mixture to_oracle(const lsqtl::MixtureParams& p) {
  return {p.theta, p.comp1.mu, p.comp1.sigma, p.comp2.mu, p.comp2.sigma};
}

}  // namespace test_support
