#pragma once

#include "clm/coeff_table.hpp"
#include "clm/simulator.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace clm {

/// Shortest round-trip decimal form.
std::string format_double(double x);

/// Header `n1,...,nk,re,im,stderr,t`; stderr is empty for analytic tables.
void write_table_csv(std::ostream& out, const CoeffTable& table);
void write_table_csv(const std::filesystem::path& path, const CoeffTable& table);

/// Inverse of write_table_csv. Only the combined standard error survives
/// the round trip; it is stored as the real-part variance of a one-run
/// table so that standard_error() returns it unchanged.
CoeffTable read_table_csv(std::istream& in);
CoeffTable read_table_csv(const std::filesystem::path& path);

/// Header `run,particle,theta`, one block of rows per run.
void write_snapshot_csv(std::ostream& out, const std::vector<Configuration>& runs);
std::vector<Configuration> read_snapshot_csv(std::istream& in, double t);
std::vector<Configuration> read_snapshot_csv(const std::filesystem::path& path, double t);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Plain SVG line chart with axes, ticks and a legend.
void write_svg_line_plot(const std::filesystem::path& path, const std::vector<PlotSeries>& series,
                         const std::string& title, const std::string& x_label, const std::string& y_label);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Splits "a,b,c" into trimmed fields.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace clm
