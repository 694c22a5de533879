#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pterisk/config.hpp"

namespace pterisk::cli {

// Command bodies throw ConfigError/DataError/BackendError; run() maps them to
// exit codes 2/3/4. Output files are written atomically.
void cmd_synth(const RunConfig& config, const std::filesystem::path& out,
               const std::string& format);
void cmd_ingest(const RunConfig& config, const std::filesystem::path& in,
                const std::string& format, const std::string& labs,
                const std::filesystem::path& out);
void cmd_serialize(const RunConfig& config, const std::filesystem::path& cohort_path,
                   const std::string& format, const std::filesystem::path& out);
void cmd_embed(const RunConfig& config, const std::filesystem::path& paragraphs_path,
               const std::filesystem::path& out);
void cmd_evaluate(const RunConfig& config);
void cmd_ablate(const RunConfig& config);
void cmd_report(const std::vector<std::filesystem::path>& report_files,
                const std::filesystem::path& out);

int run(int argc, const char* const* argv);

}  // namespace pterisk::cli
