#include "qunit/multiport.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "qunit/matrix_io.hpp"

namespace qunit {

void validate(const BeamsplitterCell& cell, int dim) {
  if (cell.mode_a < 0 || cell.mode_b >= dim || cell.mode_a >= cell.mode_b) {
    throw InputError("beam splitter modes (" + std::to_string(cell.mode_a) + ", " +
                     std::to_string(cell.mode_b) + ") out of range for dimension " +
                     std::to_string(dim));
  }
  if (!(cell.reflectivity >= 0.0 && cell.reflectivity <= 1.0)) {
    throw InputError("beam splitter reflectivity must lie in [0, 1]");
  }
  if (!(cell.phase >= 0.0 && cell.phase < kTwoPi)) {
    throw InputError("beam splitter phase must lie in [0, 2pi)");
  }
}

void validate(const ReckMesh& mesh) {
  if (mesh.dim < 1) {
    throw InputError("mesh dimension must be positive");
  }
  const std::size_t expected = static_cast<std::size_t>(mesh.dim) * (mesh.dim - 1) / 2;
  if (mesh.cells.size() != expected) {
    throw InputError("mesh of dimension " + std::to_string(mesh.dim) + " needs " +
                     std::to_string(expected) + " cells, got " +
                     std::to_string(mesh.cells.size()));
  }
  if (mesh.output_phases.size() != static_cast<std::size_t>(mesh.dim)) {
    throw InputError("mesh needs one output phase per mode");
  }
  for (const auto& cell : mesh.cells) {
    validate(cell, mesh.dim);
  }
}

CMatrix cell_unitary(const BeamsplitterCell& cell, int dim) {
  validate(cell, dim);
  const double t = std::sqrt(cell.reflectivity);
  const double s = std::sqrt(1.0 - cell.reflectivity);
  CMatrix u = CMatrix::Identity(dim, dim);
  u(cell.mode_a, cell.mode_a) = t;
  u(cell.mode_a, cell.mode_b) = s * std::polar(1.0, -cell.phase);
  u(cell.mode_b, cell.mode_a) = s * std::polar(1.0, cell.phase);
  u(cell.mode_b, cell.mode_b) = -t;
  return u;
}

CMatrix mesh_to_unitary(const ReckMesh& mesh) {
  validate(mesh);
  CMatrix u = CMatrix::Identity(mesh.dim, mesh.dim);
  for (const auto& cell : mesh.cells) {
    u = cell_unitary(cell, mesh.dim) * u;
  }
  for (int i = 0; i < mesh.dim; ++i) {
    u.row(i) *= std::polar(1.0, mesh.output_phases[i]);
  }
  return u;
}

namespace {

// m <- m * T^dagger for the cell on columns (a, b).
void apply_cell_adjoint_right(CMatrix& m, const BeamsplitterCell& cell) {
  const double t = std::sqrt(cell.reflectivity);
  const double s = std::sqrt(1.0 - cell.reflectivity);
  const Complex e = std::polar(1.0, cell.phase);
  const Eigen::Index a = cell.mode_a;
  const Eigen::Index b = cell.mode_b;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const Complex ma = m(r, a);
    const Complex mb = m(r, b);
    m(r, a) = t * ma + s * e * mb;
    m(r, b) = s * std::conj(e) * ma - t * mb;
  }
}

}  // namespace

ReckMesh reck_decompose(const CMatrix& u) {
  if (u.rows() != u.cols() || u.rows() < 1) {
    throw InputError("reck_decompose needs a square matrix");
  }
  const double deviation = unitarity_deviation(u);
  if (!(deviation <= kUnitarityTolerance)) {
    throw InputError("matrix is not unitary: max|U^dagger U - I| = " + format_double(deviation));
  }
  const int n = static_cast<int>(u.rows());
  ReckMesh mesh;
  mesh.dim = n;
  mesh.cells.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);

  CMatrix m = u;
  for (int r = n - 1; r >= 1; --r) {
    for (int k = 0; k < r; ++k) {
      BeamsplitterCell cell{k, k + 1, 1.0, 0.0};
      const Complex x = m(r, k);
      const Complex y = m(r, k + 1);
      if (std::abs(x) >= kEliminationFloor) {
        const double ax = std::norm(x);
        const double ay = std::norm(y);
        cell.reflectivity = ay / (ax + ay);
        cell.phase = wrap_two_pi(std::arg(x) - std::arg(y) + kPi);
      }
      apply_cell_adjoint_right(m, cell);
      mesh.cells.push_back(cell);
    }
  }
  mesh.output_phases.resize(n);
  for (int i = 0; i < n; ++i) {
    mesh.output_phases[i] = wrap_two_pi(std::arg(m(i, i)));
  }
  return mesh;
}

CMatrix fourier_matrix(int n) {
  if (n < 2) {
    throw InputError("fourier_matrix needs N >= 2");
  }
  CMatrix f(n, n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      // Reduce jk mod N before scaling to keep the phase argument small.
      const double angle = kTwoPi * static_cast<double>((j * k) % n) / n;
      f(j, k) = std::polar(norm, angle);
    }
  }
  return f;
}

CMatrix analyzer_unitary(const AnalyzerSetting& setting) {
  if (!(setting.reflectivity >= 0.0 && setting.reflectivity <= 1.0)) {
    throw InputError("analyzer reflectivity must lie in [0, 1]");
  }
  if (!std::isfinite(setting.phase)) {
    throw InputError("analyzer phase must be finite");
  }
  return cell_unitary({0, 1, setting.reflectivity, wrap_two_pi(setting.phase)}, 2);
}

void write_mesh(std::ostream& out, const ReckMesh& mesh) {
  validate(mesh);
  for (const auto& cell : mesh.cells) {
    out << cell.mode_a << ' ' << cell.mode_b << ' ' << format_double(cell.reflectivity) << ' '
        << format_double(cell.phase) << '\n';
  }
  out << "out";
  for (const double phi : mesh.output_phases) {
    out << ' ' << format_double(phi);
  }
  out << '\n';
}

ReckMesh read_mesh(std::istream& in) {
  ReckMesh mesh;
  std::string line;
  int line_no = 0;
  bool have_out = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    if (have_out) {
      throw InputError("mesh file: content after 'out' line at line " + std::to_string(line_no));
    }
    std::istringstream fields(line);
    if (line.rfind("out", 0) == 0) {
      std::string tag;
      fields >> tag;
      double phi = 0.0;
      while (fields >> phi) {
        mesh.output_phases.push_back(phi);
      }
      if (!fields.eof()) {
        throw InputError("mesh file: bad output phase at line " + std::to_string(line_no));
      }
      have_out = true;
      continue;
    }
    BeamsplitterCell cell;
    if (!(fields >> cell.mode_a >> cell.mode_b >> cell.reflectivity >> cell.phase)) {
      throw InputError("mesh file: expected 'a b R phi' at line " + std::to_string(line_no));
    }
    mesh.cells.push_back(cell);
  }
  if (!have_out) {
    throw InputError("mesh file: missing 'out' line");
  }
  mesh.dim = static_cast<int>(mesh.output_phases.size());
  validate(mesh);
  return mesh;
}

}  // namespace qunit
