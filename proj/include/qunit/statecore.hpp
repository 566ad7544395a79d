#pragma once

#include <span>
#include <vector>

#include "qunit/types.hpp"

namespace qunit {

/// Pure path-entangled two-quNit state
///   sum_i amps[i] |i_A, i'_B>
/// over the N correlated path pairs. Always normalized.
class QuNitPair {
 public:
  int dim() const { return static_cast<int>(amps_.size()); }
  const CVector& amps() const { return amps_; }

  /// Same state with every amplitude multiplied by e^{i phase}.
  QuNitPair with_global_phase(double phase) const;

 private:
  explicit QuNitPair(CVector amps) : amps_(std::move(amps)) {}
  friend QuNitPair make_pair_state(std::span<const Complex> amps);

  CVector amps_;
};

/// Normalizes `amps` by its Euclidean norm. Throws InputError for fewer
/// than two entries or an all-zero vector.
QuNitPair make_pair_state(std::span<const Complex> amps);
QuNitPair make_pair_state(std::initializer_list<Complex> amps);

/// Balanced two-qubit comparison state (|1,1'> + e^{i theta}|2,2'>)/sqrt(2).
/// The default theta = pi is the antisymmetric (Psi^-) convention; pass the
/// source's own relative phase to compare against the simulated ideal state.
QuNitPair bell_target(double theta = kPi);

// Two-photon basis for d = N^2. Index i < N is the correlated ket
// |i, i'>; the N(N-1) cross kets |i, j'> (i != j) follow in lexicographic
// order of (i, j).
int pair_basis_index(int i, int j, int n);
int dim_from_pair_dim(int d);

/// Permutation into the tensor-product ordering |i> (x) |j> (index i*N + j).
CMatrix to_product_basis(const CMatrix& rho_pair_basis);
CMatrix from_product_basis(const CMatrix& rho_product_basis);

/// d x d density operator in the pair basis above. Construction validates
/// Hermiticity (1e-10), unit trace (1e-10) and positivity (smallest
/// eigenvalue >= -1e-9).
class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  /// quNit dimension N with dim() == N*N.
  int local_dim() const { return dim_from_pair_dim(dim()); }
  const CMatrix& entries() const { return entries_; }
  CMatrix product_basis() const { return to_product_basis(entries_); }

  static DensityMatrix maximally_mixed(int d);

 private:
  CMatrix entries_;
};

inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kPsdTolerance = -1e-9;

/// |psi><psi| embedded in the d = N^2 pair basis.
DensityMatrix pure_density(const QuNitPair& state);

/// Coherences between distinct correlated kets scaled by p; populations
/// unchanged. p = 1 gives pure_density, p = 0 the classical mixture.
DensityMatrix dephase(const QuNitPair& state, double p);

/// Pure-target fidelity F = <psi|rho|psi> (not its square root).
double fidelity(const DensityMatrix& rho, const QuNitPair& target);

/// Wootters concurrence of a two-qubit state.
double concurrence(const DensityMatrix& rho);
/// Tangle T = C^2. Two qubits only.
double tangle(const DensityMatrix& rho);

/// Half the trace norm of the difference.
double trace_distance(const CMatrix& a, const CMatrix& b);

}  // namespace qunit
