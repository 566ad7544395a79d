#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "qunit/analysis.hpp"
#include "qunit/multiport.hpp"
#include "qunit/random.hpp"
#include "qunit/sourcesim.hpp"

namespace qunit {

CMatrix analyzer_for_basis(Basis basis) {
  switch (basis) {
    case Basis::kZ:
      return analyzer_unitary({1.0, 0.0});
    case Basis::kX:
      return analyzer_unitary({0.5, 0.0});
    case Basis::kY:
      return analyzer_unitary({0.5, kPi / 2.0});
  }
  throw InputError("unknown basis");
}

char basis_name(Basis basis) {
  static constexpr char kNames[] = {'Z', 'X', 'Y'};
  return kNames[static_cast<int>(basis)];
}

std::string tomography_label(Basis a, Basis b) {
  return std::string("tomo:") + basis_name(a) + basis_name(b);
}

RMatrix tomography_probabilities(const DensityMatrix& rho, Basis a, Basis b) {
  return coincidence_probs(rho, analyzer_for_basis(a), analyzer_for_basis(b));
}

void validate(const TomographyRecord& record) {
  for (int k = 0; k < 9; ++k) {
    if (record.counts[k].rows() != 2 || record.counts[k].cols() != 2 ||
        record.accidentals[k].rows() != 2 || record.accidentals[k].cols() != 2) {
      throw InputError("tomography record needs 2x2 counts for all nine basis pairs");
    }
    if (!record.counts[k].allFinite() || !record.accidentals[k].allFinite()) {
      throw InputError("tomography record has non-finite counts");
    }
  }
  if (!(record.integration_time_s > 0.0)) {
    throw InputError("tomography record needs integration time > 0");
  }
}

TomographyRecord tomography_record_from_counts(const std::vector<CountRecord>& records) {
  std::map<std::string, const CountRecord*> by_label;
  for (const auto& r : records) {
    by_label[r.setting_label] = &r;
  }
  TomographyRecord out;
  bool have_time = false;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const std::string label = tomography_label(static_cast<Basis>(a), static_cast<Basis>(b));
      const auto it = by_label.find(label);
      if (it == by_label.end()) {
        throw InputError("tomography data missing basis pair '" + label + "'");
      }
      const CountRecord& r = *it->second;
      if (r.dim() != 2) {
        throw InputError("tomography setting '" + label + "' is not a 2x2 table");
      }
      out.counts[3 * a + b] = r.outcome_counts.cast<double>();
      out.accidentals[3 * a + b] = r.accidental_estimate;
      if (!have_time) {
        out.integration_time_s = r.integration_time_s;
        have_time = true;
      }
    }
  }
  return out;
}

namespace {

constexpr int kOutcomes = 36;
constexpr int kParams = 15;

using Vec = Eigen::Matrix<double, kParams, 1>;
using Mat = Eigen::Matrix<double, kParams, kParams>;

// Hermitian operator basis: sigma_mu (x) sigma_nu for mu, nu in {I, X, Y, Z}.
// Index 0 is the identity.
std::array<Eigen::Matrix4cd, 16> pauli_products() {
  std::array<Eigen::Matrix2cd, 4> s;
  s[0] << 1, 0, 0, 1;
  s[1] << 0, 1, 1, 0;
  s[2] << 0, Complex(0, -1), Complex(0, 1), 0;
  s[3] << 1, 0, 0, -1;
  std::array<Eigen::Matrix4cd, 16> out;
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      Eigen::Matrix4cd k;
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          k.block<2, 2>(2 * r, 2 * c) = s[m](r, c) * s[n];
        }
      }
      out[4 * m + n] = k;
    }
  }
  return out;
}

const std::array<Eigen::Matrix4cd, 16>& basis_ops() {
  static const auto kOps = pauli_products();
  return kOps;
}

// rho(x) = (I + sum_m x_m B_m) / 4, unit trace for every x.
Eigen::Matrix4cd density_of(const Vec& x) {
  const auto& b = basis_ops();
  Eigen::Matrix4cd rho = b[0];
  for (int m = 0; m < kParams; ++m) {
    rho += x(m) * b[m + 1];
  }
  return rho / 4.0;
}

Vec coordinates_of(const Eigen::Matrix4cd& rho) {
  const auto& b = basis_ops();
  Vec x;
  for (int m = 0; m < kParams; ++m) {
    x(m) = (b[m + 1] * rho).trace().real();
  }
  return x;
}

// Each outcome probability is affine in x: p_k = c_k + a_k . x.
struct Outcome {
  double c = 0.0;
  Vec a = Vec::Zero();
  double n = 0.0;      // observed (possibly corrected) count
  double total = 0.0;  // N_b of its basis pair
  double weight = 0.0; // Gaussian 1 / (2 max(n, 1))
};

std::array<Outcome, kOutcomes> build_outcomes(const TomographyRecord& record, bool subtract) {
  const auto& ops = basis_ops();
  std::array<Outcome, kOutcomes> out;
  for (int a = 0; a < 3; ++a) {
    const CMatrix ua = analyzer_for_basis(static_cast<Basis>(a));
    for (int b = 0; b < 3; ++b) {
      const CMatrix ub = analyzer_for_basis(static_cast<Basis>(b));
      const int pair = 3 * a + b;
      RMatrix n = record.counts[pair];
      if (subtract) {
        n -= record.accidentals[pair];
      }
      // At least one count per basis pair keeps the scale finite for
      // over-subtracted data.
      const double total = std::max(n.sum(), 1.0);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          Eigen::Vector4cd v;
          for (int k = 0; k < 2; ++k) {
            for (int l = 0; l < 2; ++l) {
              v(2 * k + l) = std::conj(ua(i, k) * ub(j, l));
            }
          }
          Outcome& o = out[4 * pair + 2 * i + j];
          o.c = (v.adjoint() * ops[0] * v)(0).real() / 4.0;
          for (int m = 0; m < kParams; ++m) {
            o.a(m) = (v.adjoint() * ops[m + 1] * v)(0).real() / 4.0;
          }
          o.n = n(i, j);
          o.total = total;
          o.weight = 1.0 / (2.0 * std::max(o.n, 1.0));
        }
      }
    }
  }
  return out;
}

// Least-squares linear inversion of the relative frequencies, projected to
// the nearest PSD unit-trace matrix by eigenvalue clipping.
Eigen::Matrix4cd linear_inversion(const std::array<Outcome, kOutcomes>& outcomes) {
  RMatrix design(kOutcomes, kParams);
  RVector rhs(kOutcomes);
  for (int k = 0; k < kOutcomes; ++k) {
    design.row(k) = outcomes[k].a.transpose();
    rhs(k) = outcomes[k].n / outcomes[k].total - outcomes[k].c;
  }
  const Vec x = design.colPivHouseholderQr().solve(rhs);
  Eigen::Matrix4cd rho = density_of(x);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
  Eigen::Vector4d eig = es.eigenvalues().cwiseMax(0.0);
  if (eig.sum() <= 0.0) {
    eig.setConstant(0.25);
  }
  eig /= eig.sum();
  return es.eigenvectors() * eig.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

struct Objective {
  const std::array<Outcome, kOutcomes>& outcomes;
  Likelihood kind;

  // Negative log-likelihood up to a constant; +inf outside the domain.
  double value(const Vec& x) const {
    double f = 0.0;
    for (const auto& o : outcomes) {
      const double mu = o.total * (o.c + o.a.dot(x));
      if (kind == Likelihood::kGaussian) {
        f += o.weight * (o.n - mu) * (o.n - mu);
      } else {
        const double n = std::max(o.n, 0.0);
        if (n > 0.0 && !(mu > 0.0)) {
          return std::numeric_limits<double>::infinity();
        }
        f += mu - (n > 0.0 ? n * std::log(mu) : 0.0);
      }
    }
    return f;
  }

  void derivatives(const Vec& x, Vec& g, Mat& h) const {
    g.setZero();
    h.setZero();
    for (const auto& o : outcomes) {
      const double mu = o.total * (o.c + o.a.dot(x));
      const Vec da = o.total * o.a;
      if (kind == Likelihood::kGaussian) {
        g += -2.0 * o.weight * (o.n - mu) * da;
        h += 2.0 * o.weight * da * da.transpose();
      } else {
        const double n = std::max(o.n, 0.0);
        const double m = std::max(mu, 1e-300);
        g += (1.0 - n / m) * da;
        h += (n / (m * m)) * da * da.transpose();
      }
    }
  }
};

// -log det rho(x), with gradient and Hessian. Returns false when rho(x) is
// not positive definite.
bool barrier(const Vec& x, double* value, Vec* g, Mat* h) {
  const Eigen::Matrix4cd rho = density_of(x);
  const Eigen::LLT<Eigen::Matrix4cd> llt(rho);
  if (llt.info() != Eigen::Success) {
    return false;
  }
  const Eigen::Matrix4cd l = llt.matrixL();
  double logdet = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double d = l(i, i).real();
    if (!(d > 0.0)) {
      return false;
    }
    logdet += 2.0 * std::log(d);
  }
  if (value) {
    *value = -logdet;
  }
  if (g || h) {
    const Eigen::Matrix4cd inv = llt.solve(Eigen::Matrix4cd::Identity());
    const auto& b = basis_ops();
    std::array<Eigen::Matrix4cd, kParams> ib;
    for (int m = 0; m < kParams; ++m) {
      ib[m] = inv * b[m + 1] / 4.0;
    }
    for (int m = 0; m < kParams; ++m) {
      if (g) {
        (*g)(m) = -ib[m].trace().real();
      }
      if (h) {
        for (int n = 0; n <= m; ++n) {
          const double v = (ib[m] * ib[n]).trace().real();
          (*h)(m, n) = v;
          (*h)(n, m) = v;
        }
      }
    }
  }
  return true;
}

double log_likelihood(const Eigen::Matrix4cd& rho, const std::array<Outcome, kOutcomes>& outcomes,
                      Likelihood kind) {
  const Vec x = coordinates_of(rho);
  double ll = 0.0;
  for (const auto& o : outcomes) {
    const double mu = o.total * std::max(0.0, o.c + o.a.dot(x));
    if (kind == Likelihood::kGaussian) {
      ll -= o.weight * (o.n - mu) * (o.n - mu);
    } else {
      const double n = std::max(o.n, 0.0);
      ll += (n > 0.0 ? n * std::log(std::max(mu, 1e-300)) : 0.0) - mu - std::lgamma(n + 1.0);
    }
  }
  return ll;
}

// rho = T^dagger T with T lower triangular, via Cholesky of the
// index-reversed matrix; small eigenvalues are lifted so the factor exists.
DensityMatrix to_density_matrix(const Eigen::Matrix4cd& rho_interior) {
  Eigen::Matrix4cd rev;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      rev(r, c) = rho_interior(3 - r, 3 - c);
    }
  }
  rev = 0.5 * (rev + rev.adjoint()).eval();
  Eigen::LLT<Eigen::Matrix4cd> llt(rev);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("tomography estimate lost positive definiteness");
  }
  const Eigen::Matrix4cd l = llt.matrixL();
  Eigen::Matrix4cd t;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      t(r, c) = std::conj(l(3 - c, 3 - r));
    }
  }
  CMatrix m = t.adjoint() * t;
  m = 0.5 * (m + m.adjoint()).eval();
  m /= m.trace().real();
  return DensityMatrix(from_product_basis(m));
}

}  // namespace

TomographyResult mle_tomography(const TomographyRecord& record, const TomographyOptions& options) {
  validate(record);
  if (options.target.dim() != 2) {
    throw InputError("tomography target must be a two-qubit state");
  }
  if (options.max_iterations < 1) {
    throw InputError("tomography max_iterations must be >= 1");
  }
  const auto outcomes = build_outcomes(record, options.subtract);
  const Objective objective{outcomes, options.likelihood};

  // Seed: linear inversion pulled slightly into the interior.
  constexpr double kMix = 1e-3;
  const Eigen::Matrix4cd seed =
      (1.0 - kMix) * linear_inversion(outcomes) + kMix * Eigen::Matrix4cd::Identity() / 4.0;
  Vec x = coordinates_of(seed);

  // Barrier weight schedule relative to the count scale.
  double scale = 0.0;
  for (const auto& o : outcomes) {
    scale += o.total;
  }
  scale = std::max(scale / kOutcomes, 1.0);
  const double mu_final = 1e-14 * scale;
  double mu = 1e-2 * scale;

  int iteration = 0;
  bool converged = false;
  for (;;) {
    const bool last_stage = mu <= mu_final;
    bool stage_done = false;
    while (!stage_done) {
      if (iteration >= options.max_iterations) {
        break;
      }
      ++iteration;
      Vec g_f;
      Mat h_f;
      objective.derivatives(x, g_f, h_f);
      Vec g_b;
      Mat h_b;
      double b0 = 0.0;
      if (!barrier(x, &b0, &g_b, &h_b)) {
        throw NumericalError("tomography iterate left the positive cone");
      }
      const Vec g = g_f + mu * g_b;
      const Mat h = h_f + mu * h_b;
      const Vec step = h.ldlt().solve(-g);
      if (!step.allFinite()) {
        throw NumericalError("tomography Newton system is singular");
      }
      const double f0 = objective.value(x) + mu * b0;
      const double slope = g.dot(step);
      double t = 1.0;
      Vec next = x;
      bool accepted = false;
      while (t > 1e-30) {
        const Vec candidate = x + t * step;
        double b1 = 0.0;
        if (barrier(candidate, &b1, nullptr, nullptr)) {
          const double f1 = objective.value(candidate) + mu * b1;
          if (f1 <= f0 + 1e-4 * t * slope) {
            next = candidate;
            accepted = true;
            break;
          }
        }
        t *= 0.5;
      }
      const double moved = accepted ? (next - x).cwiseAbs().maxCoeff() : 0.0;
      if (accepted) {
        x = next;
      }
      const double decrement = -slope;  // Newton decrement squared
      if (last_stage) {
        stage_done = moved < options.step_tolerance;
        converged = stage_done;
      } else {
        stage_done = !accepted || decrement < 1e-10 || moved < 1e-12;
      }
    }
    if (converged || iteration >= options.max_iterations) {
      break;
    }
    mu = std::max(mu * 0.1, mu_final);
  }

  const Eigen::Matrix4cd rho_product = density_of(x);
  DensityMatrix rho = to_density_matrix(rho_product);
  if (!converged) {
    throw TomographyError("MLE tomography did not converge within " +
                              std::to_string(options.max_iterations) + " iterations",
                          rho);
  }
  TomographyResult result;
  result.fidelity = fidelity(rho, options.target);
  result.tangle = tangle(rho);
  result.loglikelihood = log_likelihood(rho.product_basis(), outcomes, options.likelihood);
  result.iterations = iteration;
  result.rho = std::move(rho);
  return result;
}

McUncertainty monte_carlo_uncertainty(const TomographyRecord& record, int n_samples,
                                      std::uint64_t seed, const TomographyOptions& options) {
  validate(record);
  if (n_samples < 2) {
    throw InputError("Monte Carlo uncertainty needs at least two samples");
  }
  std::vector<double> fids(n_samples);
  std::vector<double> tangles(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    Rng rng(derive_seed(seed, "mc-resample", static_cast<std::uint64_t>(s)));
    TomographyRecord resampled = record;
    for (int k = 0; k < 9; ++k) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          resampled.counts[k](i, j) =
              static_cast<double>(rng.poisson(std::max(0.0, record.counts[k](i, j))));
        }
      }
    }
    const TomographyResult r = mle_tomography(resampled, options);
    fids[s] = r.fidelity;
    tangles[s] = r.tangle;
  }
  auto stddev = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (const double x : v) {
      mean += x;
    }
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (const double x : v) {
      ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  return {stddev(fids), stddev(tangles)};
}

}  // namespace qunit
