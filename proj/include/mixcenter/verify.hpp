#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mixcenter/cauchy_mix.hpp"
#include "mixcenter/discrete_mix.hpp"
#include "mixcenter/rearrangement.hpp"

namespace mixcenter {

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Two-sample statistic sup |F_n - G_m|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Asymptotic 99% critical value of the one-sample statistic, 1.628 / sqrt(N).
double ks_critical_99(std::size_t n);

struct BranchStats {
  std::size_t count = 0;
  double mean_dev = 0.0;
  double max_abs_dev = 0.0;
  double max_bound_ratio = 0.0;  // max |row sum - target| / row_bound
};

struct SumStats {
  std::size_t count = 0;
  double mean = 0.0;
  double mean_dev = 0.0;
  double max_abs_dev = 0.0;
  double max_bound_ratio = 0.0;
  bool within_bounds = true;
  std::map<int, BranchStats> per_branch;

  json to_json() const;
};

/// Row-sum deviations from target. Rows with a positive row_bound are also
/// compared against it.
SumStats sum_stats(const std::vector<SampleRow>& rows, double target);
SumStats sum_stats(const std::vector<std::vector<double>>& rows, double target);

struct InvariantResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::string target;
  std::vector<double> ks_per_coordinate;
  double sum_mean = 0.0;
  double sum_max_abs_dev = 0.0;
  std::vector<InvariantResult> invariants;
  json config;
  std::uint64_t seed = 0;

  bool all_passed() const;
  std::vector<std::string> names() const;
  json to_json() const;
  /// One line per invariant: name,passed,measured,threshold,detail.
  std::string to_csv() const;
};

struct SuiteOptions {
  std::size_t rows = 100000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
  std::string engine = "construction";
};

/// Invariants of the joint-mix construction for cfg (internals of the
/// mixer where there is one, plus statistics of sampled rows). When rows is
/// given those rows are checked instead of drawing new ones.
VerificationReport run_invariant_suite(const MixerConfig& cfg, const SuiteOptions& opt = {},
                                       const std::vector<SampleRow>* rows = nullptr);

/// Certificate checks for a finite coupling claimed to have sum C.
VerificationReport run_invariant_suite(const Coupling& coupling, const std::vector<FiniteDiscrete>& marginals,
                                       double C, double sum_tol = 1e-9);

/// Column multisets and monotone spread for a rearrangement run.
VerificationReport run_invariant_suite(const RaResult& result, const QuantileMatrix& original);

/// The two ex01 couplings and the exclusion of sum 2 for (2 nu + gamma) / 3.
VerificationReport verify_ex01(int K);

}  // namespace mixcenter
