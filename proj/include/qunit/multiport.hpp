#pragma once

#include <iosfwd>
#include <vector>

#include "qunit/types.hpp"

namespace qunit {

/// Two-mode beam splitter with a phase, acting on modes mode_a < mode_b.
///
/// Its 2x2 block on (mode_a, mode_b) is
///   [ sqrt(R)                 sqrt(1-R) e^{-i phase} ]
///   [ sqrt(1-R) e^{i phase}   -sqrt(R)               ]
struct BeamsplitterCell {
  int mode_a = 0;
  int mode_b = 1;
  double reflectivity = 1.0;
  double phase = 0.0;  ///< [0, 2pi)
};

/// Triangular (Reck) mesh. The realized unitary is
///   diag(e^{i output_phases}) * T_K * ... * T_1
/// where T_1 = cells.front() is the first element the light meets.
struct ReckMesh {
  int dim = 0;
  std::vector<BeamsplitterCell> cells;
  std::vector<double> output_phases;
};

/// Reflectivity and phase of a two-port analyzer (beam splitter + phase).
struct AnalyzerSetting {
  double reflectivity = 0.5;
  double phase = 0.0;
};

void validate(const BeamsplitterCell& cell, int dim);
void validate(const ReckMesh& mesh);

CMatrix cell_unitary(const BeamsplitterCell& cell, int dim);
CMatrix mesh_to_unitary(const ReckMesh& mesh);

/// Entries below this magnitude are treated as already eliminated and get a
/// pass-through cell (R = 1, phase = 0).
inline constexpr double kEliminationFloor = 1e-14;
/// Largest max|U^dagger U - I| accepted by reck_decompose.
inline constexpr double kUnitarityTolerance = 1e-8;

/// Compiles a unitary into N(N-1)/2 adjacent-mode cells plus output phases.
/// Rows are cleared from the bottom up by mixing neighbouring columns, so
/// mesh_to_unitary(reck_decompose(u)) reproduces u to rounding error.
/// Throws InputError (with the measured deviation) for non-unitary input.
ReckMesh reck_decompose(const CMatrix& u);

/// F_jk = e^{2 pi i jk/N} / sqrt(N).
CMatrix fourier_matrix(int n);

/// 2x2 analyzer whose first row is (sqrt(a), sqrt(1-a) e^{-i phase}); it is
/// the single-cell mesh with R = a. With output amplitudes row . input,
/// output 0 detects sqrt(a)|1> + sqrt(1-a) e^{i phase}|2>.
CMatrix analyzer_unitary(const AnalyzerSetting& setting);

// Mesh file: one line per cell "a b R phi", then "out <phi_1> ... <phi_N>".
void write_mesh(std::ostream& out, const ReckMesh& mesh);
ReckMesh read_mesh(std::istream& in);

}  // namespace qunit
