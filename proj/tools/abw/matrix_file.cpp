#include "matrix_file.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace abw::cli {

namespace {

int positive_int(const json& doc, const char* key, const std::string& origin) {
  if (!doc.contains(key) || !doc[key].is_number_integer() || doc[key].get<long long>() < 1) {
    throw InvalidInput(origin + ": \"" + key + "\" must be a positive integer");
  }
  const long long value = doc[key].get<long long>();
  if (value > 4096) throw InvalidInput(origin + ": \"" + key + "\" is unreasonably large");
  return static_cast<int>(value);
}

std::string shortest(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path + ": malformed JSON (" + e.what() + ")");
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << text;
  if (!out) throw InvalidInput("write failed: " + path);
}

MatrixFile parse_matrix(const json& doc, const std::string& origin) {
  if (!doc.is_object()) throw InvalidInput(origin + ": expected a JSON object");
  MatrixFile file;
  const int steps = positive_int(doc, "T", origin);
  const int dim = positive_int(doc, "d", origin);
  file.shape = BlockShape(steps, dim);

  if (!doc.contains("kind") || !doc["kind"].is_string()) throw InvalidInput(origin + ": missing \"kind\"");
  file.kind = doc["kind"].get<std::string>();

  if (!doc.contains("data") || !doc["data"].is_array()) throw InvalidInput(origin + ": missing \"data\" array");
  const json& data = doc["data"];
  const auto n = static_cast<std::size_t>(file.shape.size());
  if (data.size() != n * n) {
    throw ShapeError(origin + ": \"data\" has " + std::to_string(data.size()) + " entries, expected " +
                     std::to_string(n * n) + " for T=" + std::to_string(steps) + ", d=" + std::to_string(dim));
  }
  file.data.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (!data[k].is_number()) throw InvalidInput(origin + ": entry " + std::to_string(k) + " is not a number");
    file.data(static_cast<Eigen::Index>(k / n), static_cast<Eigen::Index>(k % n)) = data[k].get<double>();
  }

  try {
    if (file.kind == "lower_triangular") {
      BlockLowerTriangular(file.shape, file.data);
    } else if (file.kind == "block_orthogonal") {
      BlockDiagOrthogonal(file.shape, file.data);
    } else if (file.kind == "covariance") {
      block_cholesky(file.data, file.shape);
    } else if (file.kind == "general") {
      BlockMatrix(file.shape, file.data);
    } else {
      throw InvalidInput("unknown kind \"" + file.kind + "\"");
    }
  } catch (const Error& e) {
    // Re-raise with the file name, keeping the error category.
    const std::string msg = origin + ": " + e.what();
    if (dynamic_cast<const NotPSD*>(&e)) throw NotPSD(msg);
    if (dynamic_cast<const ShapeError*>(&e)) throw ShapeError(msg);
    throw InvalidInput(msg);
  }
  return file;
}

MatrixFile read_matrix_file(const std::string& path) { return parse_matrix(read_json_file(path), path); }

BlockLowerTriangular to_factor(const MatrixFile& file, double tol) {
  if (file.kind == "covariance") return block_cholesky(file.data, file.shape, tol);
  if (file.kind == "lower_triangular" || file.kind == "general") {
    return BlockLowerTriangular(file.shape, file.data);
  }
  throw InvalidInput("expected a lower_triangular, general or covariance matrix, got kind \"" + file.kind + "\"");
}

BlockLowerTriangular read_factor(const std::string& path, double tol) {
  const MatrixFile file = read_matrix_file(path);
  try {
    return to_factor(file, tol);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

BlockDiagOrthogonal read_orthogonal(const std::string& path) {
  const MatrixFile file = read_matrix_file(path);
  if (file.kind != "block_orthogonal" && file.kind != "general") {
    throw InvalidInput(path + ": expected a block_orthogonal matrix, got kind \"" + file.kind + "\"");
  }
  try {
    return BlockDiagOrthogonal(file.shape, file.data);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

Vector read_vector(const std::string& path, int expected_size) {
  const json doc = read_json_file(path);
  const json* arr = &doc;
  if (doc.is_object() && doc.contains("data")) arr = &doc["data"];
  if (!arr->is_array()) throw InvalidInput(path + ": expected a JSON array or {\"data\": [...]}");
  if (static_cast<int>(arr->size()) != expected_size) {
    throw ShapeError(path + ": mean vector has " + std::to_string(arr->size()) + " entries, expected " +
                     std::to_string(expected_size));
  }
  Vector v(expected_size);
  for (int i = 0; i < expected_size; ++i) {
    const json& x = (*arr)[static_cast<std::size_t>(i)];
    if (!x.is_number()) throw InvalidInput(path + ": entry " + std::to_string(i) + " is not a number");
    v(i) = x.get<double>();
    if (!std::isfinite(v(i))) throw InvalidInput(path + ": non-finite entry");
  }
  return v;
}

json matrix_json(const BlockMatrix& m, const std::string& kind) {
  json data = json::array();
  const Matrix& a = m.matrix();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) data.push_back(a(i, j) == 0.0 ? 0.0 : a(i, j));
  }
  return json{{"T", m.shape().steps()}, {"d", m.shape().dim()}, {"kind", kind}, {"data", std::move(data)}};
}

std::string matrix_csv(const BlockMatrix& m) {
  std::ostringstream out;
  const Matrix& a = m.matrix();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out << ',';
      out << shortest(a(i, j) == 0.0 ? 0.0 : a(i, j));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace abw::cli
