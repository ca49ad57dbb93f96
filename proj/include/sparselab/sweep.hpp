#pragma once

// Cartesian parameter sweeps over the certify drivers, with resumable
// NDJSON record files and a CSV summary per grid point.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sparselab/certify.hpp"
#include "sparselab/serialize.hpp"

namespace sparselab {

struct WeightFamily {
  std::string type = "constant";  // constant | power
  std::vector<double> alpha_grid{0.0};
};

struct SweepConfig {
  std::string experiment;  // theorem-a | theorem-b | theorem-c | buckley
  int n = 1;
  int L = 8;
  int m = 1;
  std::vector<double> p0{1.0};
  std::vector<double> p;   // exponent tuple (theorem-b/c) or the single norm exponent
  std::vector<int> k{0};
  WeightFamily weight_family;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out;         // output directory; empty keeps everything in memory
  std::string op = "hilbert";      // theorem-c only
  std::optional<double> delta0;    // theorem-c only; fitted for hilbert when absent
};

/// Validates every field and rejects unknown keys (ParseError / DomainError).
SweepConfig parse_sweep_config(const Json& j);
SweepConfig read_sweep_config(const std::string& path);

struct SweepPoint {
  double p0 = 1.0;
  int k = 0;
  double alpha = 0.0;
};

struct SummaryRow {
  std::string experiment;
  int n = 1, L = 0, m = 1;
  double p0 = 1.0;
  std::vector<double> pbar;
  int k = 0;
  double alpha = 0.0;
  int trials = 0;             // non-degenerate trials
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;  // at the largest ratio
  double median_ratio = 0.0;
  double half_ratio = 0.0;    // running sup after the first half of the trials
  double beta = 1.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<CertificationRecord> records;  // grid order, then trial order
  std::vector<SummaryRow> summary;            // one row per grid point
  std::size_t computed = 0;
  std::size_t reused = 0;
};

std::vector<SweepPoint> sweep_points(const SweepConfig& c);

/// FNV-1a hash of the parameters that identify one trial, as 16 hex digits.
std::string record_key(const CertificationRecord& r, const SweepConfig& c);

/// Runs the sweep. With c.out set, records already present in
/// out/records.ndjson are reused, new ones are appended, and out/summary.csv is rewritten.
SweepResult run_sweep(const SweepConfig& c);

/// One trial of the sweep at a grid point (exposed for tests).
CertificationRecord run_trial(const SweepConfig& c, const SweepPoint& pt, int trial);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
std::string summary_csv_header();

}  // namespace sparselab
