#pragma once

// Matrix interchange format:
//   {"T": int, "d": int, "kind": string, "data": [n*n reals, row-major]}
// kind is one of lower_triangular, block_orthogonal, general, covariance.
// Structural invariants of the declared kind are checked on load.

#include <string>

#include "abw/abw.hpp"
#include "json.hpp"

namespace abw::cli {

using nlohmann::json;

struct MatrixFile {
  BlockShape shape{1, 1};
  std::string kind;
  Matrix data;
};

// Parses and validates a matrix document. Throws InvalidInput / ShapeError / NotPSD.
MatrixFile parse_matrix(const json& doc, const std::string& origin);
MatrixFile read_matrix_file(const std::string& path);

// A factor: lower_triangular or general files must be block lower triangular;
// covariance files are factored with block_cholesky.
BlockLowerTriangular to_factor(const MatrixFile& file, double tol);
BlockLowerTriangular read_factor(const std::string& path, double tol);

BlockDiagOrthogonal read_orthogonal(const std::string& path);

// Mean vector: a JSON array, or an object with a "data" array.
Vector read_vector(const std::string& path, int expected_size);

json matrix_json(const BlockMatrix& m, const std::string& kind);
std::string matrix_csv(const BlockMatrix& m);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace abw::cli
