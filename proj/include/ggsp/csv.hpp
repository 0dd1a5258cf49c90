#ifndef GGSP_CSV_HPP
#define GGSP_CSV_HPP

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

namespace ggsp {

/// Formats a double with enough digits to round-trip (used everywhere a
/// value is written to disk, so repeated runs are byte-identical).
std::string format_double(double v);

/// Splits one CSV line on commas; no quoting support (none of our formats
/// need it).
std::vector<std::string> split_csv_line(const std::string& line);

/// Parses a double, reporting the offending line number on failure.
double parse_double(const std::string& tok, int line_no);
long parse_long(const std::string& tok, int line_no);

/// Plain numeric matrix, one row per line, comma separated.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(std::istream& in);

void write_matrix_csv_file(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace ggsp

#endif // GGSP_CSV_HPP
