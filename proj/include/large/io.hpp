#pragma once

#include <armadillo>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "large/core.hpp"
#include "large/metrics.hpp"

namespace large {

struct CsvReadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Comma-separated numeric matrix; a non-numeric first row is treated as a
// header and skipped. Throws CsvReadError with a line-numbered message on
// malformed input. No missing values permitted.
arma::mat read_csv_matrix(const std::filesystem::path& path);

void write_csv_matrix(const std::filesystem::path& path, const arma::mat& M);

// threshold,fpr,tpr rows.
void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve);

// i,j,value,partial_correlation rows over the support, 1-based indices.
void write_edges_csv(const std::filesystem::path& path, const PrecisionEstimate& est);

// %.17g, enough digits to round-trip a double.
std::string format_double(double v);

}  // namespace large
