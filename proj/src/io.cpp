#include "clm/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace clm {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return {buf.data(), end};
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

double parse_double(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

}  // namespace

void write_table_csv(std::ostream& out, const CoeffTable& table) {
  for (int j = 1; j <= table.k(); ++j) out << 'n' << j << ',';
  out << "re,im,stderr,t\n";
  const std::string t = format_double(table.t());
  for_each_tuple(table.lattice(), [&](std::size_t idx, const Tuple& tuple) {
    for (int n : tuple) out << n << ',';
    const auto v = table.value_at(idx);
    out << format_double(v.real()) << ',' << format_double(v.imag()) << ',';
    if (const auto se = table.standard_error_at(idx)) out << format_double(*se);
    out << ',' << t << '\n';
  });
}

void write_table_csv(const std::filesystem::path& path, const CoeffTable& table) {
  auto out = open_for_write(path);
  write_table_csv(out, table);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

CoeffTable read_table_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty coefficient table");
  const auto header = split_csv_line(line);
  int k = 0;
  while (k < static_cast<int>(header.size()) && header[static_cast<std::size_t>(k)] == "n" + std::to_string(k + 1)) ++k;
  if (k == 0 || header.size() != static_cast<std::size_t>(k) + 4) {
    throw std::runtime_error("unexpected coefficient table header '" + line + "'");
  }

  struct Row {
    Tuple tuple;
    std::complex<double> value;
    std::optional<double> se;
  };
  std::vector<Row> rows;
  int n_max = 0;
  double t = 0.0;
  bool empirical = false;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) throw std::runtime_error("malformed table row '" + line + "'");
    Row row;
    for (int j = 0; j < k; ++j) {
      row.tuple.push_back(std::stoi(fields[static_cast<std::size_t>(j)]));
      n_max = std::max(n_max, std::abs(row.tuple.back()));
    }
    const auto at = [&](int off) { return fields[static_cast<std::size_t>(k + off)]; };
    row.value = {parse_double(at(0)), parse_double(at(1))};
    if (!at(2).empty()) {
      row.se = parse_double(at(2));
      empirical = true;
    }
    t = parse_double(at(3));
    rows.push_back(std::move(row));
  }

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const TupleLattice lattice(k, n_max);
  std::vector<std::complex<double>> values(lattice.size(), {nan, nan});
  std::vector<double> var_re(lattice.size(), 0.0), var_im(lattice.size(), 0.0);
  for (const auto& row : rows) {
    const auto idx = lattice.index(row.tuple);
    values[idx] = row.value;
    if (row.se) var_re[idx] = *row.se * *row.se;
  }
  if (empirical) return CoeffTable::empirical(k, n_max, t, 1, std::move(values), std::move(var_re), std::move(var_im));
  CoeffTable table(k, n_max, t);
  for (std::size_t i = 0; i < values.size(); ++i) table.set_value_at(i, values[i]);
  return table;
}

CoeffTable read_table_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return read_table_csv(in);
}

void write_snapshot_csv(std::ostream& out, const std::vector<Configuration>& runs) {
  out << "run,particle,theta\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t i = 0; i < runs[r].angles.size(); ++i) {
      out << r << ',' << i << ',' << format_double(runs[r].angles[i]) << '\n';
    }
  }
}

std::vector<Configuration> read_snapshot_csv(std::istream& in, double t) {
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"run", "particle", "theta"}) {
    throw std::runtime_error("snapshot CSV must start with 'run,particle,theta'");
  }
  std::map<long, std::map<long, double>> grouped;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw std::runtime_error("malformed snapshot row '" + line + "'");
    grouped[std::stol(fields[0])][std::stol(fields[1])] = parse_double(fields[2]);
  }
  std::vector<Configuration> runs;
  for (const auto& [run, particles] : grouped) {
    Configuration config;
    config.clock = t;
    for (const auto& [index, theta] : particles) config.angles.push_back(theta);
    runs.push_back(std::move(config));
  }
  return runs;
}

std::vector<Configuration> read_snapshot_csv(const std::filesystem::path& path, double t) {
  auto in = open_for_read(path);
  return read_snapshot_csv(in, t);
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

}  // namespace

void write_svg_line_plot(const std::filesystem::path& path, const std::vector<PlotSeries>& series,
                         const std::string& title, const std::string& x_label, const std::string& y_label) {
  constexpr double width = 720, height = 440;
  constexpr double left = 70, right = 20, top = 40, bottom = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("plot series '" + s.label + "' has ragged data");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
  auto py = [&](double y) { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  auto out = open_for_write(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
      << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    out << "<line x1=\"" << px(xv) << "\" y1=\"" << height - bottom << "\" x2=\"" << px(xv) << "\" y2=\""
        << height - bottom + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(xv) << "\" y=\"" << height - bottom + 18 << "\" text-anchor=\"middle\">"
        << tick_label(xv) << "</text>\n";
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << left << "\" y2=\"" << py(yv)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << tick_label(yv)
        << "</text>\n";
  }
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
      << xml_escape(x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << (top + height - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (top + height - bottom) / 2 << ")\">" << xml_escape(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % std::size(colors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (!std::isfinite(series[s].x[i]) || !std::isfinite(series[s].y[i])) continue;
      out << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    }
    out << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(s) + 8;
    out << "<line x1=\"" << width - right - 150 << "\" y1=\"" << ly << "\" x2=\"" << width - right - 130
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << width - right - 125 << "\" y=\"" << ly + 4 << "\">" << xml_escape(series[s].label)
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string sha256_file(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("SHA-256 unavailable");
  std::array<char, 1 << 15> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace clm
