#include "large/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace large {

namespace {

bool parse_double(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  const char* begin = tok.c_str();
  char* end = nullptr;
  errno = 0;
  out = std::strtod(begin, &end);
  return errno == 0 && end == begin + tok.size();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string tok;
  std::stringstream ss(line);
  while (std::getline(ss, tok, ',')) {
    // trim surrounding whitespace
    const auto a = tok.find_first_not_of(" \t\r");
    const auto b = tok.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : tok.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

arma::mat read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvReadError("cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first_data_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> toks = split_csv(line);
    std::vector<double> row(toks.size());
    bool ok = true;
    std::size_t bad_col = 0;
    for (std::size_t c = 0; c < toks.size(); ++c) {
      if (!parse_double(toks[c], row[c])) {
        ok = false;
        bad_col = c;
        break;
      }
    }
    if (!ok) {
      if (first_data_row && rows.empty()) continue;  // header row
      throw CsvReadError("line " + std::to_string(line_no) + ", column " +
                         std::to_string(bad_col + 1) + ": not a number");
    }
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw CsvReadError("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(width) + " fields, got " +
                         std::to_string(row.size()));
    rows.push_back(std::move(row));
    first_data_row = false;
  }
  if (rows.empty()) throw CsvReadError("no numeric rows in " + path.string());
  arma::mat M(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) M(i, j) = rows[i][j];
  return M;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv_matrix(const std::filesystem::path& path, const arma::mat& M) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (arma::uword i = 0; i < M.n_rows; ++i) {
    for (arma::uword j = 0; j < M.n_cols; ++j) {
      if (j) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < curve.fpr.size(); ++i)
    out << format_double(curve.thresholds[i]) << ',' << format_double(curve.fpr[i])
        << ',' << format_double(curve.tpr[i]) << '\n';
}

void write_edges_csv(const std::filesystem::path& path, const PrecisionEstimate& est) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "i,j,value,partial_correlation\n";
  for (const auto& [i, j] : est.support) {
    const double v = est.theta(i, j);
    const double pc = -v / std::sqrt(est.theta(i, i) * est.theta(j, j));
    out << (i + 1) << ',' << (j + 1) << ',' << format_double(v) << ','
        << format_double(pc) << '\n';
  }
}

}  // namespace large
