#pragma once

#include <iosfwd>
#include <string>

#include "shellvi/vi_solver.hpp"

namespace shellvi {

// Plain-text system format:
//   shellvi-system 1
//   dofs N
//   matrix NNZ
//   i j value        (NNZ lines, sorted by row then column, 0-based)
//   load
//   f_0 ... f_{N-1}  (one per line)
//   constraints M
//   node d0 d1 d2 c0 c1 c2 bound   (M lines)
// Values are written with 17 significant digits so that a round trip is exact.
void write_system(std::ostream& os, const QuadraticProgram& qp);
QuadraticProgram read_system(std::istream& is);

void save_system(const std::string& path, const QuadraticProgram& qp);
QuadraticProgram load_system(const std::string& path);

// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace shellvi
