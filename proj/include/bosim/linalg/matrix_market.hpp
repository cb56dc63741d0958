#pragma once

#include "bosim/linalg/sparse.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace bosim {

/// Reads a real coordinate Matrix Market matrix (general or symmetric).
SparseMatrix read_matrix_market(std::istream& in, const std::string& name = "matrix");
SparseMatrix read_matrix_market_file(const std::string& path);

/// Writes a real general coordinate matrix with 17 significant digits.
void write_matrix_market(std::ostream& out, const SparseMatrix& a);
void write_matrix_market_file(const std::string& path, const SparseMatrix& a);

/// Dense array-format vectors (one column).
std::vector<double> read_mm_vector(std::istream& in, const std::string& name = "vector");
void write_mm_vector(std::ostream& out, const std::vector<double>& v);

} // namespace bosim
