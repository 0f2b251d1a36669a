#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "slt/harness.hpp"

namespace slt {

inline constexpr const char* kVersion = "1.0.0";

// Shortest exact decimal for a double (17 significant digits; round-trips).
std::string fmt17(double v);
double parse_double(const std::string& s, int line, const std::string& field);

// Flat key = value config with dotted section keys; '#' comments.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Canonical serialization; parse_config_text(canonical_config_text(c)) == c.
std::string canonical_config_text(const ExperimentConfig& cfg);

void write_observables_csv(const std::filesystem::path& path,
                           const std::string& model_id, double beta,
                           const std::vector<ReplicationRow>& rows);
void write_aggregate_csv(const std::filesystem::path& path,
                         const AggregateTable& table);
AggregateTable read_aggregate_csv(const std::filesystem::path& path);

void write_fits_json(const std::filesystem::path& path, const Model& model,
                     const AggregateTable& table, const FitResult& fit,
                     const std::vector<CheckResult>& checks);

struct ManifestTimes {
  std::string started;
  std::string finished;
};
void write_manifest_json(const std::filesystem::path& path,
                         const ExperimentConfig& cfg,
                         const ManifestTimes& times);

void write_plotdata_csv(const std::filesystem::path& path,
                        const AggregateTable& table, const Model& model);

std::string iso_timestamp_utc();

}  // namespace slt
