#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pterisk/cohort.hpp"

namespace pterisk {

enum class CohortFormat { kDelimitedTable, kStructuredRecords };

CohortFormat cohort_format_from_name(const std::string& name);

struct LoadResult {
  RawCohort cohort;
  std::vector<std::string> warnings;  // unknown columns, recovered cells
};

// Flattened one-row-per-subject table (CSV, UTF-8, header row) or
// line-delimited records mirroring Subject. Missing cells are empty or
// NOT_REPORTED. Malformed rows raise DataError naming row and column.
LoadResult load_cohort(const std::filesystem::path& path, CohortFormat format);

// Long-format lab table (subject_id, analyte, time_days, value); aggregated
// summaries replace any flat-column summaries for the subjects present.
void attach_lab_long_table(RawCohort& cohort, const std::filesystem::path& labs_path);

// Ingestion-format writers (labels become definite outcomes).
void save_cohort_csv(const Cohort& cohort, const std::filesystem::path& path);
void save_cohort_jsonl(const Cohort& cohort, const std::filesystem::path& path);

std::string cohort_to_csv(const Cohort& cohort);
std::string cohort_to_jsonl(const Cohort& cohort);

}  // namespace pterisk
