#include "qunit/statecore.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace qunit {

QuNitPair make_pair_state(std::span<const Complex> amps) {
  if (amps.size() < 2) {
    throw InputError("a quNit pair needs at least two amplitudes");
  }
  CVector v(static_cast<Eigen::Index>(amps.size()));
  for (std::size_t i = 0; i < amps.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = amps[i];
  }
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InputError("degenerate amplitude vector");
  }
  return QuNitPair(v / norm);
}

QuNitPair make_pair_state(std::initializer_list<Complex> amps) {
  return make_pair_state(std::span<const Complex>(amps.begin(), amps.size()));
}

QuNitPair QuNitPair::with_global_phase(double phase) const {
  return QuNitPair(amps_ * std::polar(1.0, phase));
}

QuNitPair bell_target(double theta) {
  return make_pair_state({Complex(1.0, 0.0), std::polar(1.0, theta)});
}

int pair_basis_index(int i, int j, int n) {
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw InputError("path index out of range");
  }
  if (i == j) {
    return i;
  }
  return n + i * (n - 1) + (j < i ? j : j - 1);
}

int dim_from_pair_dim(int d) {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d))));
  if (n < 2 || n * n != d) {
    throw InputError("dimension " + std::to_string(d) + " is not N^2 for a quNit pair");
  }
  return n;
}

namespace {

CMatrix permute_basis(const CMatrix& in, bool to_product) {
  const int d = static_cast<int>(in.rows());
  const int n = dim_from_pair_dim(d);
  std::vector<int> pair_of_product(d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      pair_of_product[i * n + j] = pair_basis_index(i, j, n);
    }
  }
  CMatrix out(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      if (to_product) {
        out(r, c) = in(pair_of_product[r], pair_of_product[c]);
      } else {
        out(pair_of_product[r], pair_of_product[c]) = in(r, c);
      }
    }
  }
  return out;
}

}  // namespace

CMatrix to_product_basis(const CMatrix& rho_pair_basis) {
  return permute_basis(rho_pair_basis, true);
}

CMatrix from_product_basis(const CMatrix& rho_product_basis) {
  return permute_basis(rho_product_basis, false);
}

DensityMatrix::DensityMatrix(CMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw InputError("density matrix must be square and non-empty");
  }
  if (!entries_.allFinite()) {
    throw InputError("density matrix has non-finite entries");
  }
  const double herm = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermitianTolerance) {
    throw InputError("density matrix not Hermitian (deviation " + std::to_string(herm) + ")");
  }
  const Complex tr = entries_.trace();
  if (std::abs(tr - 1.0) > kTraceTolerance) {
    throw InputError("density matrix trace " + std::to_string(tr.real()) + " != 1");
  }
  const CMatrix hermitian_part = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < kPsdTolerance) {
    throw InputError("density matrix not positive semidefinite (eigenvalue " +
                     std::to_string(min_eig) + ")");
  }
}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
  return DensityMatrix(CMatrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix pure_density(const QuNitPair& state) {
  return dephase(state, 1.0);
}

DensityMatrix dephase(const QuNitPair& state, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InputError("dephasing parameter p must lie in [0, 1]");
  }
  const int n = state.dim();
  const int d = n * n;
  CMatrix rho = CMatrix::Zero(d, d);
  const CVector& a = state.amps();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Complex c = a(i) * std::conj(a(j));
      rho(i, j) = (i == j) ? c : p * c;
    }
  }
  return DensityMatrix(std::move(rho));
}

double fidelity(const DensityMatrix& rho, const QuNitPair& target) {
  const int n = target.dim();
  if (rho.dim() != n * n) {
    throw InputError("fidelity: density matrix dimension " + std::to_string(rho.dim()) +
                     " does not match target dimension " + std::to_string(n * n));
  }
  // The target only populates the correlated block of the pair basis.
  const CVector& a = target.amps();
  const Complex f = a.adjoint() * rho.entries().topLeftCorner(n, n) * a;
  return std::clamp(f.real(), 0.0, 1.0);
}

namespace {

CMatrix psd_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  const RVector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double concurrence(const DensityMatrix& rho) {
  if (rho.dim() != 4) {
    throw InputError("tangle defined for two qubits only");
  }
  const CMatrix r = rho.product_basis();
  CMatrix flip = CMatrix::Zero(4, 4);
  flip(0, 3) = -1.0;
  flip(1, 2) = 1.0;
  flip(2, 1) = 1.0;
  flip(3, 0) = -1.0;
  const CMatrix r_tilde = flip * r.conjugate() * flip;

  // Eigenvalues of rho * r_tilde equal those of the Hermitian
  // sqrt(rho) r_tilde sqrt(rho).
  const CMatrix s = psd_sqrt(r);
  const CMatrix m = s * r_tilde * s;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  std::vector<double> lambda(4);
  for (int k = 0; k < 4; ++k) {
    lambda[k] = std::sqrt(std::max(0.0, es.eigenvalues()(k)));
  }
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  return std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
}

double tangle(const DensityMatrix& rho) {
  const double c = concurrence(rho);
  return std::min(1.0, c * c);
}

double trace_distance(const CMatrix& a, const CMatrix& b) {
  const CMatrix diff = a - b;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qunit
