#include <algorithm>
#include <cmath>

#include "qunit/analysis.hpp"

namespace qunit {

VisibilityResult visibility(double cc_max, double cc_min) {
  if (!std::isfinite(cc_max) || !std::isfinite(cc_min)) {
    throw InputError("visibility: non-finite count rate");
  }
  if (cc_max < cc_min) {
    throw InputError("visibility: cc_max < cc_min");
  }
  VisibilityResult result;
  if (cc_min < 0.0) {
    cc_min = 0.0;
    result.floored = true;
  }
  if (cc_max + cc_min <= 0.0) {
    throw InputError("visibility undefined: both count rates are zero");
  }
  result.value = std::clamp((cc_max - cc_min) / (cc_max + cc_min), 0.0, 1.0);
  return result;
}

void validate(const FringeScan& scan) {
  if (scan.phases.size() != scan.cc_counts.size()) {
    throw InputError("fringe scan: phases and counts differ in length");
  }
  if (scan.phases.size() < 2) {
    throw InputError("fringe scan needs at least two points");
  }
  for (std::size_t k = 0; k < scan.phases.size(); ++k) {
    if (!std::isfinite(scan.phases[k]) || !std::isfinite(scan.cc_counts[k])) {
      throw InputError("fringe scan has non-finite entries");
    }
  }
}

double FringeFit::evaluate(double phase) const {
  return offset + amplitude * std::cos(phase + phase0);
}

FringeFit fringe_extrema(const FringeScan& scan) {
  validate(scan);
  const auto n = static_cast<Eigen::Index>(scan.phases.size());
  if (n < 4) {
    throw InputError("sinusoid fit needs at least four points; use two_point_extrema");
  }
  RMatrix x(n, 3);
  RVector y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x(k, 0) = 1.0;
    x(k, 1) = std::cos(scan.phases[k]);
    x(k, 2) = std::sin(scan.phases[k]);
    y(k) = scan.cc_counts[k];
  }
  const Eigen::Matrix3d normal = x.transpose() * x;
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
  if (!lu.isInvertible()) {
    throw NumericalError("fringe fit: phases do not determine a sinusoid");
  }
  const Eigen::Vector3d beta = lu.solve(x.transpose() * y);
  // Sandwich covariance: Poisson noise makes the residual variance follow the fringe.
  const RVector resid = y - x * beta;
  const Eigen::Matrix3d bread = lu.inverse();
  const Eigen::Matrix3d meat = x.transpose() * resid.cwiseAbs2().asDiagonal() * x;
  const double dof = static_cast<double>(n) / static_cast<double>(n - 3);
  const Eigen::Matrix3d cov = dof * bread * meat * bread;

  const double c = beta(1);
  const double s = beta(2);
  FringeFit fit;
  fit.offset = beta(0);
  fit.amplitude = std::hypot(c, s);
  fit.phase0 = std::atan2(-s, c);
  fit.cc_max = fit.offset + fit.amplitude;
  fit.cc_min = fit.offset - fit.amplitude;
  fit.phase_max = wrap_two_pi(-fit.phase0);
  fit.phase_min = wrap_two_pi(-fit.phase0 + kPi);
  fit.sigma_offset = std::sqrt(std::max(0.0, cov(0, 0)));
  if (fit.amplitude > 0.0) {
    const double b = fit.amplitude;
    fit.sigma_amplitude =
        std::sqrt(std::max(0.0, (c * c * cov(1, 1) + s * s * cov(2, 2) + 2.0 * c * s * cov(1, 2)) / (b * b)));
    fit.cov_offset_amplitude = (c * cov(0, 1) + s * cov(0, 2)) / b;
  } else {
    fit.sigma_amplitude = std::sqrt(std::max(0.0, 0.5 * (cov(1, 1) + cov(2, 2))));
  }
  const double scale = std::max(std::abs(fit.offset), 1.0);
  fit.degenerate = fit.amplitude <= 2.0 * fit.sigma_amplitude || fit.amplitude <= 1e-12 * scale;
  return fit;
}

FringeFit two_point_extrema(const FringeScan& scan) {
  validate(scan);
  auto closest = [&](double target) {
    std::size_t best = 0;
    double best_dist = 1e300;
    for (std::size_t k = 0; k < scan.phases.size(); ++k) {
      const double d = std::abs(wrap_pi(scan.phases[k] - target));
      if (d < best_dist) {
        best_dist = d;
        best = k;
      }
    }
    return best;
  };
  const std::size_t i0 = closest(0.0);
  const std::size_t i1 = closest(kPi);
  if (i0 == i1) {
    throw InputError("two-point estimator needs distinct samples near 0 and pi");
  }
  const double y0 = scan.cc_counts[i0];
  const double y1 = scan.cc_counts[i1];
  FringeFit fit;
  fit.cc_max = std::max(y0, y1);
  fit.cc_min = std::min(y0, y1);
  fit.phase_max = wrap_two_pi(y0 >= y1 ? scan.phases[i0] : scan.phases[i1]);
  fit.phase_min = wrap_two_pi(y0 >= y1 ? scan.phases[i1] : scan.phases[i0]);
  fit.offset = 0.5 * (fit.cc_max + fit.cc_min);
  fit.amplitude = 0.5 * (fit.cc_max - fit.cc_min);
  fit.phase0 = -fit.phase_max;
  fit.degenerate = fit.amplitude <= 1e-12 * std::max(std::abs(fit.offset), 1.0);
  return fit;
}

FringeVisibility fringe_visibility(const FringeFit& fit) {
  FringeVisibility out;
  out.degenerate = fit.degenerate;
  if (fit.degenerate) {
    return out;
  }
  const VisibilityResult v = visibility(fit.cc_max, fit.cc_min);
  out.value = v.value;
  out.floored = v.floored;
  if (!v.floored && fit.offset > 0.0) {
    const double a = fit.offset;
    const double b = fit.amplitude;
    const double var = fit.sigma_amplitude * fit.sigma_amplitude / (a * a) +
                       b * b * fit.sigma_offset * fit.sigma_offset / (a * a * a * a) -
                       2.0 * b * fit.cov_offset_amplitude / (a * a * a);
    out.sigma = std::sqrt(std::max(0.0, var));
  }
  return out;
}

}  // namespace qunit
