#include "lsqtl/kernel.hpp"

#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "lsqtl/error.hpp"

namespace lsqtl {

void require_valid(const LocScale& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.mu)) {
    throw DomainError("location-scale parameters need finite mu and sigma > 0 (got mu=" +
                      std::to_string(p.mu) + ", sigma=" + std::to_string(p.sigma) + ")");
  }
}

std::array<double, 4> InfoMatrix::sqrt() const {
  const double s = std::sqrt(determinant());
  const double t = std::sqrt(sigma_T2 + sigma_U2 + 2.0 * s);
  return {(sigma_T2 + s) / t, sigma_TU / t, sigma_TU / t, (sigma_U2 + s) / t};
}

std::array<double, 4> InfoMatrix::inverse() const {
  const double det = determinant();
  return {sigma_U2 / det, -sigma_TU / det, -sigma_TU / det, sigma_T2 / det};
}

Kernel Kernel::from_name(std::string_view name) {
  if (name == "normal") return kNormal;
  if (name == "logistic") return kLogistic;
  throw InvalidInput("unknown kernel '" + std::string(name) + "' (expected normal|logistic)");
}

std::vector<std::string> Kernel::registry() { return {"normal", "logistic"}; }

std::string_view Kernel::name() const noexcept {
  switch (id_) {
    case KernelId::normal:
      return "normal";
    case KernelId::logistic:
      return "logistic";
  }
  return "?";
}

double Kernel::cdf_std(double z) const noexcept {
  switch (id_) {
    case KernelId::normal:
      return 0.5 * std::erfc(-z / std::numbers::sqrt2);
    case KernelId::logistic:
      return 1.0 / (1.0 + std::exp(-z));
  }
  return 0.0;
}

double Kernel::quantile_std(double u) const noexcept {
  switch (id_) {
    case KernelId::normal:
      return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
    case KernelId::logistic:
      return std::log(u / (1.0 - u));
  }
  return 0.0;
}

double Kernel::log_density(double y, const LocScale& p) const {
  require_valid(p);
  return log_density_unchecked(y, p.mu, p.sigma);
}

InfoMatrix Kernel::info_matrix() const {
  switch (id_) {
    case KernelId::normal:
      return {1.0, 2.0, 0.0};
    case KernelId::logistic: {
      constexpr double pi2 = std::numbers::pi * std::numbers::pi;
      return {1.0 / 3.0, (pi2 + 3.0) / 9.0, 0.0};
    }
  }
  return info_matrix_quadrature();
}

InfoMatrix Kernel::info_matrix_quadrature() const {
  auto moment = [this](auto&& g) {
    return integrate_real_line([&](double z) {
      const double lf = log_pdf_std(z);
      return lf < -700.0 ? 0.0 : g(score(z)) * std::exp(lf);
    });
  };
  const double mT = moment([](Score s) { return s.T; });
  const double mU = moment([](Score s) { return s.U; });
  const double mTT = moment([](Score s) { return s.T * s.T; });
  const double mUU = moment([](Score s) { return s.U * s.U; });
  const double mTU = moment([](Score s) { return s.T * s.U; });
  return {mTT - mT * mT, mUU - mU * mU, mTU - mT * mU};
}

double Kernel::sample_std(StreamRng& rng) const {
  switch (id_) {
    case KernelId::normal:
      return rng.normal();
    case KernelId::logistic: {
      const double u = rng.uniform();
      return std::log(u / (1.0 - u));
    }
  }
  return 0.0;
}

}  // namespace lsqtl
