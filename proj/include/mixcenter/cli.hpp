#pragma once

#include <filesystem>
#include <iosfwd>

#include "mixcenter/distributions.hpp"

namespace mixcenter::cli {

inline constexpr int kSchemaVersion = 1;

/// Exit codes: 0 success, 1 domain error (or a failed verification),
/// 2 I/O, parse error or bad usage.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Measured values for every stored reproduction expectation, compared
/// against the expectation file.
json run_repro(const json& expectations);

/// $MIXCENTER_OUT_DIR, or the working directory.
std::filesystem::path default_out_dir();

}  // namespace mixcenter::cli
