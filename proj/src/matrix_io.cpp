#include "qunit/matrix_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace qunit {

double unitarity_deviation(const CMatrix& u) {
  if (u.rows() != u.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  const CMatrix gram = u.adjoint() * u;
  return (gram - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

double wrap_two_pi(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) {
    r += kTwoPi;
  }
  // fmod of a value just below a multiple of 2pi can round up to 2pi.
  if (r >= kTwoPi) {
    r = 0.0;
  }
  return r;
}

double wrap_pi(double angle) {
  double r = std::remainder(angle, kTwoPi);
  if (r <= -kPi) {
    r += kTwoPi;
  }
  return r;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string format_complex(Complex z) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.17g%+.17gj", z.real(), z.imag());
  return buf;
}

Complex parse_complex(std::string_view text) {
  const std::string s(text);
  const char* begin = s.c_str();
  char* end = nullptr;
  const double re = std::strtod(begin, &end);
  if (end == begin || (*end != '+' && *end != '-')) {
    throw InputError("malformed complex literal '" + s + "'");
  }
  const char* im_begin = end;
  const double im = std::strtod(im_begin, &end);
  if (end == im_begin || *end != 'j' || *(end + 1) != '\0') {
    throw InputError("malformed complex literal '" + s + "'");
  }
  return {re, im};
}

void write_matrix(std::ostream& out, const CMatrix& m) {
  out << "dim=" << m.rows() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) {
        out << ' ';
      }
      out << format_complex(m(i, j));
    }
    out << '\n';
  }
}

CMatrix read_matrix(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("dim=", 0) != 0) {
    throw InputError("matrix file must start with 'dim=<d>'");
  }
  const long d = std::strtol(header.c_str() + 4, nullptr, 10);
  if (d <= 0) {
    throw InputError("invalid matrix dimension in header '" + header + "'");
  }
  CMatrix m(d, d);
  for (long i = 0; i < d; ++i) {
    std::string line;
    if (!std::getline(in, line)) {
      throw InputError("matrix file truncated at row " + std::to_string(i));
    }
    std::istringstream row(line);
    std::string token;
    long j = 0;
    while (row >> token) {
      if (j >= d) {
        throw InputError("too many entries in matrix row " + std::to_string(i));
      }
      m(i, j++) = parse_complex(token);
    }
    if (j != d) {
      throw InputError("too few entries in matrix row " + std::to_string(i));
    }
  }
  return m;
}

std::string matrix_to_string(const CMatrix& m) {
  std::ostringstream out;
  write_matrix(out, m);
  return out.str();
}

CMatrix matrix_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_matrix(in);
}

}  // namespace qunit
