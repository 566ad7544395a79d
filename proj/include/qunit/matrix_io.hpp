#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "qunit/types.hpp"

namespace qunit {

// Text matrix format shared by density matrices and unitaries:
//
//   dim=<d>
//   <re+imj> <re+imj> ... (d entries)
//   ... (d rows)
//
// Entries are written with 17 significant digits, so a write/read cycle
// reproduces every double exactly.

std::string format_complex(Complex z);
Complex parse_complex(std::string_view text);

void write_matrix(std::ostream& out, const CMatrix& m);
CMatrix read_matrix(std::istream& in);

std::string matrix_to_string(const CMatrix& m);
CMatrix matrix_from_string(const std::string& text);

/// %.17g formatting used by every text artifact in the project.
std::string format_double(double value);

}  // namespace qunit
