#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "../support/oracles.hpp"
#include "qunit/matrix_io.hpp"
#include "qunit/multiport.hpp"

using namespace qunit;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(CellUnitary, FullReflectionIsDiagOneMinusOne) {
  const CMatrix u = cell_unitary({0, 1, 1.0, 0.0}, 2);
  CMatrix expected(2, 2);
  expected << 1, 0, 0, -1;
  EXPECT_LT(max_abs(u - expected), 1e-15);
}

TEST(CellUnitary, BalancedSplitterModuli) {
  const CMatrix u = cell_unitary({0, 1, 0.5, 0.0}, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(std::abs(u(i, j)), 1.0 / std::sqrt(2.0), 1e-15);
    }
  }
}

TEST(CellUnitary, EmbedsInIdentity) {
  const CMatrix u = cell_unitary({1, 2, 0.3, 1.1}, 4);
  EXPECT_EQ(u(0, 0), Complex(1.0));
  EXPECT_EQ(u(3, 3), Complex(1.0));
  EXPECT_EQ(u(0, 1), Complex(0.0));
  EXPECT_NEAR(std::abs(u(1, 1)), std::sqrt(0.3), 1e-15);
}

TEST(CellUnitary, RandomSettingsAreUnitary) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const BeamsplitterCell cell{0, 1, u01(gen), 2.0 * kPi * u01(gen)};
    EXPECT_LT(unitarity_deviation(cell_unitary(cell, 3)), 1e-14);
  }
}

TEST(CellUnitary, RejectsBadModes) {
  EXPECT_THROW(cell_unitary({0, 2, 0.5, 0.0}, 2), InputError);
  EXPECT_THROW(cell_unitary({1, 0, 0.5, 0.0}, 2), InputError);
  EXPECT_THROW(cell_unitary({-1, 0, 0.5, 0.0}, 2), InputError);
  EXPECT_THROW(cell_unitary({0, 1, 1.5, 0.0}, 2), InputError);
  EXPECT_THROW(cell_unitary({0, 1, 0.5, 7.0}, 2), InputError);
}

TEST(MeshToUnitary, PassThroughMeshWithCompensatingPhasesIsIdentity) {
  ReckMesh mesh{3, {{0, 1, 1.0, 0.0}, {1, 2, 1.0, 0.0}, {0, 1, 1.0, 0.0}}, {0.0, 0.0, 0.0}};
  const CMatrix raw = mesh_to_unitary(mesh);
  EXPECT_LT(max_abs(raw.cwiseAbs() - CMatrix::Identity(3, 3)), 1e-15);
  for (int i = 0; i < 3; ++i) mesh.output_phases[i] = wrap_two_pi(-std::arg(raw(i, i)));
  EXPECT_LT(max_abs(mesh_to_unitary(mesh) - CMatrix::Identity(3, 3)), 1e-12);
}

TEST(MeshToUnitary, SingleCellIsBalancedAnalyzer) {
  const ReckMesh mesh{2, {{0, 1, 0.5, 0.0}}, {0.0, 0.0}};
  EXPECT_LT(max_abs(mesh_to_unitary(mesh) - analyzer_unitary({0.5, 0.0})), 1e-15);
}

TEST(MeshToUnitary, RejectsWrongCellCount) {
  const ReckMesh mesh{3, {{0, 1, 0.5, 0.0}}, {0.0, 0.0, 0.0}};
  EXPECT_THROW(mesh_to_unitary(mesh), InputError);
}

TEST(ReckDecompose, IdentityRoundTrip) {
  const ReckMesh mesh = reck_decompose(CMatrix::Identity(3, 3));
  EXPECT_EQ(mesh.cells.size(), 3u);
  EXPECT_LT(max_abs(mesh_to_unitary(mesh) - CMatrix::Identity(3, 3)), 1e-12);
}

TEST(ReckDecompose, FourierRoundTrip) {
  const CMatrix f = fourier_matrix(4);
  EXPECT_LT(max_abs(mesh_to_unitary(reck_decompose(f)) - f), 1e-10);
}

TEST(ReckDecompose, HaarRoundTripAndCellCount) {
  std::mt19937_64 gen(12);
  for (int n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      const CMatrix u = oracle::haar_unitary(n, gen);
      const ReckMesh mesh = reck_decompose(u);
      ASSERT_EQ(mesh.cells.size(), static_cast<std::size_t>(n * (n - 1) / 2));
      EXPECT_LT(max_abs(mesh_to_unitary(mesh) - u), 1e-10) << "n=" << n;
      for (const auto& c : mesh.cells) {
        EXPECT_EQ(c.mode_b, c.mode_a + 1);
        EXPECT_GE(c.reflectivity, 0.0);
        EXPECT_LE(c.reflectivity, 1.0);
        EXPECT_GE(c.phase, 0.0);
        EXPECT_LT(c.phase, 2.0 * kPi);
      }
    }
  }
}

TEST(ReckDecompose, PermutationUsesPassThroughCells) {
  CMatrix p = CMatrix::Zero(3, 3);
  p(0, 2) = p(1, 0) = p(2, 1) = 1.0;
  const ReckMesh mesh = reck_decompose(p);
  EXPECT_EQ(mesh.cells.size(), 3u);
  EXPECT_LT(max_abs(mesh_to_unitary(mesh) - p), 1e-12);
}

TEST(ReckDecompose, RejectsNonUnitaryWithDeviation) {
  CMatrix m = CMatrix::Identity(2, 2);
  m(0, 0) = 1.1;
  try {
    reck_decompose(m);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("not unitary"), std::string::npos);
    EXPECT_NE(msg.find("0.21"), std::string::npos) << msg;
  }
}

TEST(ReckDecompose, RejectsNonSquare) {
  EXPECT_THROW(reck_decompose(CMatrix::Identity(2, 3)), InputError);
}

TEST(FourierMatrix, TwoByTwo) {
  CMatrix expected(2, 2);
  expected << 1, 1, 1, -1;
  expected /= std::sqrt(2.0);
  EXPECT_LT(max_abs(fourier_matrix(2) - expected), 1e-15);
}

TEST(FourierMatrix, BalancedModuli) {
  const CMatrix f = fourier_matrix(4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(std::abs(f(i, j)), 0.5, 1e-15);
    }
  }
}

TEST(FourierMatrix, UnitaryAndOrthonormalColumns) {
  for (int n = 2; n <= 16; ++n) {
    const CMatrix f = fourier_matrix(n);
    EXPECT_LT(max_abs(f * f.adjoint() - CMatrix::Identity(n, n)), 1e-12);
    EXPECT_LT(max_abs(f.adjoint() * f - CMatrix::Identity(n, n)), 1e-12);
  }
}

TEST(FourierMatrix, RejectsSmallN) {
  EXPECT_THROW(fourier_matrix(1), InputError);
}

TEST(AnalyzerUnitary, FullReflectivityIsDiagonal) {
  for (double phi : {0.0, 1.0, 3.0}) {
    const CMatrix u = analyzer_unitary({1.0, phi});
    EXPECT_NEAR(std::abs(u(0, 1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(u(1, 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(u(0, 0)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(u(1, 1)), 1.0, 1e-15);
  }
}

TEST(AnalyzerUnitary, BalancedRealSplitter) {
  const CMatrix u = analyzer_unitary({0.5, 0.0});
  EXPECT_LT(u.imag().cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(max_abs(u.cwiseAbs() - CMatrix::Constant(2, 2, 1.0 / std::sqrt(2.0))), 1e-15);
}

TEST(AnalyzerUnitary, FirstRowMatchesProjectedState) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = u01(gen);
    const double phi = 2.0 * kPi * u01(gen);
    const CMatrix u = analyzer_unitary({a, phi});
    EXPECT_LT(max_abs(u - oracle::analyzer(a, phi)), 1e-14);
    const Eigen::Vector2cd detected = u.row(0).adjoint();
    const Eigen::Vector2cd out = u * detected;
    EXPECT_NEAR(std::abs(out(0)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(out(1)), 0.0, 1e-12);
  }
}

TEST(AnalyzerUnitary, UnitaryOnGrid) {
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const CMatrix u = analyzer_unitary({i / 9.0, 2.0 * kPi * j / 10.0});
      EXPECT_LT(unitarity_deviation(u), 1e-14);
    }
  }
}

TEST(MeshFile, RoundTrip) {
  std::mt19937_64 gen(14);
  const ReckMesh mesh = reck_decompose(oracle::haar_unitary(5, gen));
  std::stringstream ss;
  write_mesh(ss, mesh);
  const ReckMesh back = read_mesh(ss);
  ASSERT_EQ(back.cells.size(), mesh.cells.size());
  for (std::size_t k = 0; k < mesh.cells.size(); ++k) {
    EXPECT_EQ(back.cells[k].mode_a, mesh.cells[k].mode_a);
    EXPECT_EQ(back.cells[k].reflectivity, mesh.cells[k].reflectivity);
    EXPECT_EQ(back.cells[k].phase, mesh.cells[k].phase);
  }
  EXPECT_EQ(back.output_phases, mesh.output_phases);
}

TEST(MeshFile, RejectsMalformed) {
  std::stringstream ss("0 1 0.5\nout 0 0\n");
  EXPECT_THROW(read_mesh(ss), InputError);
}

TEST(MatrixFile, RoundTripIsExact) {
  std::mt19937_64 gen(15);
  const CMatrix u = oracle::haar_unitary(4, gen);
  std::stringstream ss;
  write_matrix(ss, u);
  const CMatrix back = read_matrix(ss);
  EXPECT_EQ(max_abs(back - u), 0.0);
}

TEST(MatrixFile, ComplexLiteralFormat) {
  EXPECT_EQ(format_complex(Complex(0.5, -0.25)), "0.5-0.25j");
  EXPECT_EQ(parse_complex("1e-3+2j"), Complex(1e-3, 2.0));
  EXPECT_THROW(parse_complex("1+2"), InputError);
}

TEST(MatrixFile, RejectsBadHeader) {
  std::stringstream ss("size=2\n1+0j 0+0j\n0+0j 1+0j\n");
  EXPECT_THROW(read_matrix(ss), InputError);
}
