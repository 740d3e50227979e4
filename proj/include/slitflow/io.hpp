#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace slitflow {

inline constexpr const char* kVersion = "0.1.0";

/// Machine-readable result block emitted by every CLI command.
/// Fields that a command does not compute are left unset and serialize
/// as null ("N/A").
struct RunSummary {
  std::optional<double> max_velocity_discrepancy;
  std::vector<double> continuity_residual_norms;
  std::optional<long> crossings_total;
  std::optional<double> screen_l1;
  std::optional<double> force_discrepancy;
  double wall_time = 0.0;
};

std::string summary_to_json(const RunSummary& summary,
                            std::uint64_t scenario_hash);

/// %.17g, locale-independent; round-trips a double exactly.
std::string format_double(double v);

/// Collects rows and writes the whole artifact atomically
/// (write-temp-then-rename).  Every file starts with a comment line
/// carrying the scenario hash and tool version.
class TableWriter {
 public:
  TableWriter(std::vector<std::string> columns, std::uint64_t scenario_hash);

  void add_row(const std::vector<double>& values);
  /// Missing values (NaN) are written as "nan".
  void write_csv(const std::string& path) const;
  void write_json(const std::string& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
  std::uint64_t hash_;
};

/// Atomically write text to path (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& text);

std::string hash_hex(std::uint64_t h);

}  // namespace slitflow
