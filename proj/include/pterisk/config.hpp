#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "pterisk/cohort_io.hpp"
#include "pterisk/embedder.hpp"
#include "pterisk/eval.hpp"
#include "pterisk/synth.hpp"

namespace pterisk {

// Single run configuration; flags > config file > defaults. Its content hash
// is the config fingerprint stamped into every report.
struct RunConfig {
  // Cohort source: a file or synthetic generation.
  std::string cohort_path;  // empty = synthesize
  std::string cohort_format = "delimited-table";
  std::string labs_path;  // optional long-format lab table
  SynthParams synth;

  BackendDescriptor backend;
  std::string pooling = "mean";
  std::string fusion = "modality_aware";
  gbdt::TrainParams classifier;
  ProtocolParams protocol;

  std::string output_dir = "pterisk_out";
  std::string cache_dir;  // empty = no persistent cache
  bool subgroups = false;
  bool permutation = false;
  int jobs = 1;

  nlohmann::ordered_json to_json() const;
  static RunConfig from_json(const nlohmann::ordered_json& j);
  static RunConfig load(const std::filesystem::path& path);

  std::string fingerprint() const;

  // Resolved cohort (loaded + inclusion-filtered, or synthesized).
  Cohort resolve_cohort() const;
};

RunConfig default_config();

}  // namespace pterisk
