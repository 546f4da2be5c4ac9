#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "lsqtl/rng.hpp"

namespace lsqtl {

/// Standard densities f(.;0,1) that generate the supported location-scale
/// families. A new family needs log f, its first two z-derivatives, the CDF
/// and quantile (for sampling), and integration bounds for quadrature.
enum class KernelId { normal, logistic };

struct LocScale {
  double mu = 0.0;
  double sigma = 1.0;
};

// Throws DomainError unless sigma is finite and positive.
void require_valid(const LocScale& p);

/// Covariance of the location and scale scores (T, U) under f(.;0,1).
struct InfoMatrix {
  double sigma_T2 = 0.0;
  double sigma_U2 = 0.0;
  double sigma_TU = 0.0;

  bool positive_definite() const {
    return sigma_T2 > 0.0 && sigma_U2 > 0.0 && sigma_TU * sigma_TU < sigma_T2 * sigma_U2;
  }
  double determinant() const { return sigma_T2 * sigma_U2 - sigma_TU * sigma_TU; }
  // Symmetric positive-definite square root, row-major 2x2.
  std::array<double, 4> sqrt() const;
  // Inverse, row-major 2x2.
  std::array<double, 4> inverse() const;
};

struct Score {
  double T = 0.0;
  double U = 0.0;
};

class Kernel {
 public:
  constexpr explicit Kernel(KernelId id) noexcept : id_(id) {}

  static Kernel from_name(std::string_view name);  // "normal" | "logistic"
  static std::vector<std::string> registry();

  constexpr KernelId id() const noexcept { return id_; }
  std::string_view name() const noexcept;

  // log f(z;0,1)
  double log_pdf_std(double z) const noexcept {
    switch (id_) {
      case KernelId::normal:
        return -0.5 * z * z - 0.91893853320467274178;
      case KernelId::logistic: {
        const double a = std::fabs(z);
        return -a - 2.0 * std::log1p(std::exp(-a));
      }
    }
    return 0.0;
  }

  // d/dz log f(z;0,1)
  double dlog_pdf_std(double z) const noexcept {
    switch (id_) {
      case KernelId::normal:
        return -z;
      case KernelId::logistic:
        return -std::tanh(0.5 * z);
    }
    return 0.0;
  }

  // d^2/dz^2 log f(z;0,1)
  double d2log_pdf_std(double z) const noexcept {
    switch (id_) {
      case KernelId::normal:
        return -1.0;
      case KernelId::logistic: {
        const double t = std::tanh(0.5 * z);
        return -0.5 * (1.0 - t * t);
      }
    }
    return 0.0;
  }

  // log f, d/dz log f and d^2/dz^2 log f in one pass.
  struct Derivatives {
    double log_pdf;
    double d1;
    double d2;
  };
  Derivatives derivatives_std(double z) const noexcept {
    switch (id_) {
      case KernelId::normal:
        return {-0.5 * z * z - 0.91893853320467274178, -z, -1.0};
      case KernelId::logistic: {
        const double a = std::fabs(z);
        const double e = std::exp(-a);
        const double t = (1.0 - e) / (1.0 + e);  // tanh(a / 2)
        return {-a - 2.0 * std::log1p(e), z < 0.0 ? t : -t, -0.5 * (1.0 - t * t)};
      }
    }
    return {0.0, 0.0, 0.0};
  }

  double cdf_std(double z) const noexcept;
  double quantile_std(double u) const noexcept;

  // log f(y; mu, sigma). Throws DomainError for sigma <= 0.
  double log_density(double y, const LocScale& p) const;

  // Unchecked variant for inner loops; caller guarantees sigma > 0.
  double log_density_unchecked(double y, double mu, double sigma) const noexcept {
    return log_pdf_std((y - mu) / sigma) - std::log(sigma);
  }

  /// Location and scale scores at the standard density:
  /// T = -d/dz log f, U = -1 - z d/dz log f.
  Score score(double z) const noexcept {
    const double g = dlog_pdf_std(z);
    return {-g, -1.0 - z * g};
  }

  /// Cov(T, U) under f(.;0,1): closed forms for the shipped kernels.
  InfoMatrix info_matrix() const;

  // Same quantity by adaptive quadrature, used to validate closed forms and
  // for kernels without them.
  InfoMatrix info_matrix_quadrature() const;

  double sample_std(StreamRng& rng) const;
  double sample(StreamRng& rng, const LocScale& p) const { return p.mu + p.sigma * sample_std(rng); }

  friend constexpr bool operator==(Kernel a, Kernel b) noexcept { return a.id_ == b.id_; }

 private:
  KernelId id_;
};

inline constexpr Kernel kNormal{KernelId::normal};
inline constexpr Kernel kLogistic{KernelId::logistic};

/// Integral of fn over the whole real line (Gauss-Kronrod, infinite
/// interval). Throws NumericalError if the error estimate exceeds `tol`
/// relative to the magnitude of the result.
template <class F>
double integrate_real_line(F&& fn, double tol = 1e-10);

}  // namespace lsqtl

#include "lsqtl/detail/quadrature.hpp"
