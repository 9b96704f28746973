#include "mixcenter/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mixcenter/errors.hpp"

namespace mixcenter::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_samples_csv(std::ostream& out, const std::vector<SampleRow>& rows, int n) {
  for (int i = 1; i <= n; ++i) out << 'x' << i << ',';
  out << "t,branch,row_sum,row_bound\n";
  for (const SampleRow& r : rows) {
    if (static_cast<int>(r.x.size()) != n) throw DomainError("write_samples_csv: row width differs from n");
    for (double v : r.x) out << format_double(v) << ',';
    out << format_double(r.t) << ',' << r.branch << ',' << format_double(r.row_sum) << ','
        << format_double(r.row_bound) << '\n';
  }
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  return in;
}

double parse_double(std::string_view s, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError("line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

void write_samples_csv(const fs::path& path, const std::vector<SampleRow>& rows, int n) {
  std::ofstream out = open_out(path);
  write_samples_csv(out, rows, n);
  if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

SampleTable read_samples_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  SampleTable table;
  for (const auto& h : header) {
    if (h.size() > 1 && h[0] == 'x') ++table.n;
  }
  const std::vector<std::string> tail{"t", "branch", "row_sum", "row_bound"};
  if (table.n < 1 || header.size() != static_cast<std::size_t>(table.n) + tail.size())
    throw ParseError(path.string() + ": unexpected header");
  for (std::size_t k = 0; k < tail.size(); ++k)
    if (header[static_cast<std::size_t>(table.n) + k] != tail[k]) throw ParseError(path.string() + ": unexpected header");

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) throw ParseError("line " + std::to_string(lineno) + ": wrong field count");
    SampleRow r;
    r.x.resize(static_cast<std::size_t>(table.n));
    for (int i = 0; i < table.n; ++i) r.x[static_cast<std::size_t>(i)] = parse_double(f[static_cast<std::size_t>(i)], lineno);
    const std::size_t b = static_cast<std::size_t>(table.n);
    r.t = parse_double(f[b], lineno);
    r.branch = static_cast<int>(parse_double(f[b + 1], lineno));
    r.row_sum = parse_double(f[b + 2], lineno);
    r.row_bound = parse_double(f[b + 3], lineno);
    table.rows.push_back(std::move(r));
  }
  return table;
}

fs::path sidecar_path(const fs::path& csv) { return fs::path(csv.string() + ".meta.json"); }

json read_json_file(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& doc) {
  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

}  // namespace mixcenter::io
