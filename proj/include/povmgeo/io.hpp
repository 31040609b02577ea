#pragma once

#include "povmgeo/geometry.hpp"

#include <string>
#include <vector>

// vendored single-header nlohmann/json
#include "json.hpp"

namespace povmgeo {

/// Locale-independent "%.12g" formatting used for every CSV number, so that
/// identical manifests yield byte-identical files.
std::string format_number(double v);

/// CSV with a documented header row; numbers printed with 12 significant
/// digits.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<double>& values);
  void add_row_raw(const std::vector<std::string>& cells);
  void write(const std::string& path) const;
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

/// Plain-text matrix dump: "# rows cols" then one space-separated row per
/// line with full precision ("%.17g").
void write_matrix(const std::string& path, const Matrix<double>& m);
Matrix<double> read_matrix(const std::string& path);

void write_json(const std::string& path, const nlohmann::json& j);

/// Basis cache (geometry serialization): index set, metric tensors, POVM
/// and COVM diagonals, condition number.
nlohmann::json basis_to_json(const MeasurementBasis<double>& basis);
MeasurementBasis<double> basis_from_json(const nlohmann::json& j);

}  // namespace povmgeo
