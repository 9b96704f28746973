#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mixcenter/cauchy_mix.hpp"
#include "mixcenter/distributions.hpp"

namespace mixcenter::io {

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double v);

/// Columns x1..xn, t, branch, row_sum, row_bound.
void write_samples_csv(std::ostream& out, const std::vector<SampleRow>& rows, int n);
void write_samples_csv(const std::filesystem::path& path, const std::vector<SampleRow>& rows, int n);

struct SampleTable {
  int n = 0;
  std::vector<SampleRow> rows;
};

/// Reads a file written by write_samples_csv. Throws ParseError on malformed
/// input and std::ios_base::failure when the file cannot be opened.
SampleTable read_samples_csv(const std::filesystem::path& path);

/// "<csv>.meta.json"
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& doc);

}  // namespace mixcenter::io
