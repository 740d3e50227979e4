#include "slitflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slitflow/errors.hpp"

namespace slitflow {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string summary_to_json(const RunSummary& summary,
                            std::uint64_t scenario_hash) {
  json j;
  j["scenario_hash"] = hash_hex(scenario_hash);
  j["version"] = kVersion;
  j["max_velocity_discrepancy"] =
      summary.max_velocity_discrepancy
          ? json(*summary.max_velocity_discrepancy)
          : json(nullptr);
  j["continuity_residual_norms"] = summary.continuity_residual_norms;
  j["crossings_total"] =
      summary.crossings_total ? json(*summary.crossings_total) : json(nullptr);
  j["screen_L1"] = summary.screen_l1 ? json(*summary.screen_l1) : json(nullptr);
  j["force_discrepancy"] = summary.force_discrepancy
                               ? json(*summary.force_discrepancy)
                               : json(nullptr);
  j["wall_time"] = summary.wall_time;
  return j.dump(2) + "\n";
}

TableWriter::TableWriter(std::vector<std::string> columns,
                         std::uint64_t scenario_hash)
    : columns_(std::move(columns)), hash_(scenario_hash) {}

void TableWriter::add_row(const std::vector<double>& values) {
  if (values.size() != columns_.size()) {
    throw Error("table row width does not match the header");
  }
  rows_.push_back(values);
}

void TableWriter::write_csv(const std::string& path) const {
  std::ostringstream out;
  out << "# scenario=" << hash_hex(hash_) << " version=" << kVersion << "\n";
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    out << columns_[c] << (c + 1 < columns_.size() ? "," : "\n");
  }
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << format_double(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
  }
  write_file_atomic(path, out.str());
}

void TableWriter::write_json(const std::string& path) const {
  json j;
  j["scenario"] = hash_hex(hash_);
  j["version"] = kVersion;
  j["columns"] = columns_;
  json rows = json::array();
  for (const auto& row : rows_) {
    json r = json::array();
    for (double v : row) {
      if (std::isnan(v)) {
        r.push_back(nullptr);
      } else {
        r.push_back(v);
      }
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  write_file_atomic(path, j.dump() + "\n");
}

void write_file_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << text;
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

}  // namespace slitflow
