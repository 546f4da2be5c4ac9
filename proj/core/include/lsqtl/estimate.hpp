#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "lsqtl/likelihood.hpp"

namespace lsqtl {

struct FitConfig {
  int theta_grid_size = 101;
  int em_max_iter = 500;
  double em_tol = 1e-8;  // absolute log-likelihood increment
  double sigma_floor_factor = 1e-3;
  // Use the closed-form normal M-step when the kernel is normal. Turning it
  // off routes the normal kernel through the generic Newton M-step.
  bool closed_form_normal = true;

  void validate() const;  // throws InvalidInput
};

enum class ModelKind { null, equal_scale, full };
std::string_view to_string(ModelKind kind);

/// A point of the uniform theta grid. `complement` is 1 - theta computed as
/// (G-1-j)/(G-1), so that grid points j and G-1-j mirror each other exactly.
struct ThetaPoint {
  double theta = 0.5;
  double complement = 0.5;

  static ThetaPoint on_grid(int index, int grid_size);
  static ThetaPoint at(double theta);
};

struct ProfilePoint {
  double theta = 0.0;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  bool on_floor = false;
};

struct MixtureFit {
  MixtureParams params;
  double loglik = 0.0;
  ModelKind model = ModelKind::null;
  bool converged = true;
  bool hit_sigma_floor = false;
  int theta_index = -1;  // grid index of theta-hat, -1 for the null model
  std::vector<ProfilePoint> theta_profile;
};

/// Location-scale MLE of a single sample.
LocScale fit_location_scale(const Kernel& kernel, std::span<const double> y);

/// sigma_floor_factor times the pooled median absolute deviation.
double sigma_floor(const PhenotypeGroups& groups, const FitConfig& cfg);

MixtureFit fit_null(const PhenotypeGroups& groups, const Kernel& kernel);
MixtureFit fit_full(const PhenotypeGroups& groups, const Kernel& kernel, const FitConfig& cfg);
MixtureFit fit_equal_scale(const PhenotypeGroups& groups, const Kernel& kernel,
                           const FitConfig& cfg);

/// Both alternative fits on one grid. The full profile is restarted from the
/// equal-scale solution wherever that is better, so
/// null <= equal_scale <= full holds pointwise in theta.
struct AlternativeFits {
  MixtureFit equal_scale;
  MixtureFit full;
};
AlternativeFits fit_alternatives(const PhenotypeGroups& groups, const Kernel& kernel,
                                 const FitConfig& cfg, const MixtureFit& null_fit);

/// A single EM run at fixed theta; `trace` receives the log-likelihood at
/// every E-step when non-null. For the equal-scale model a start with two
/// different scales is first moved to their root mean square.
struct EmRun {
  MixtureParams params;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  bool on_floor = false;
};
EmRun run_em(const PhenotypeGroups& groups, const Kernel& kernel, ModelKind model,
             ThetaPoint theta, const MixtureParams& start, const FitConfig& cfg,
             double floor, std::vector<double>* trace = nullptr);

}  // namespace lsqtl
