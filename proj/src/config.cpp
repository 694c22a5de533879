#include "pterisk/config.hpp"

#include <iostream>

#include "pterisk/errors.hpp"
#include "pterisk/hashing.hpp"
#include "pterisk/io_util.hpp"

namespace pterisk {

using json = nlohmann::ordered_json;

json RunConfig::to_json() const {
  json j;
  json cohort;
  cohort["path"] = cohort_path;
  cohort["format"] = cohort_format;
  cohort["labs_path"] = labs_path;
  json synth_j;
  synth_j["seed"] = synth.seed;
  synth_j["n"] = synth.n;
  synth_j["prevalence"] = synth.prevalence;
  synth_j["w_seizure"] = synth.w_seizure;
  synth_j["w_gcs"] = synth.w_gcs;
  synth_j["w_surgery"] = synth.w_surgery;
  synth_j["w_icu"] = synth.w_icu;
  synth_j["noise_scale"] = synth.noise_scale;
  synth_j["mask_fraction"] = synth.mask_fraction;
  synth_j["imaging_availability"] = synth.imaging_availability;
  synth_j["text_only_signal"] = synth.text_only_signal;
  cohort["synth"] = synth_j;
  j["cohort"] = cohort;

  json backend_j;
  backend_j["backend_id"] = backend.backend_id;
  backend_j["kind"] = backend.kind == BackendKind::kHash ? "hash" : "remote";
  backend_j["dim"] = backend.dim;
  backend_j["endpoint"] = backend.endpoint;
  backend_j["max_batch"] = backend.max_batch;
  backend_j["timeout_ms"] = backend.timeout_ms;
  backend_j["max_retries"] = backend.max_retries;
  backend_j["max_in_flight"] = backend.max_in_flight;
  backend_j["level"] = backend.level == ResponseLevel::kToken ? "token" : "pooled";
  backend_j["pooled_strategy"] = pooling_name(backend.pooled_strategy);
  backend_j["hash_seed"] = backend.hash_seed;
  j["backend"] = backend_j;

  j["pooling"] = pooling;
  j["fusion"] = fusion;

  json cls;
  cls["learning_rate"] = classifier.learning_rate;
  cls["max_depth"] = classifier.max_depth;
  cls["l1_alpha"] = classifier.l1_alpha;
  cls["l2_lambda"] = classifier.l2_lambda;
  cls["max_rounds"] = classifier.max_rounds;
  cls["early_stop_rounds"] = classifier.early_stop_rounds;
  cls["min_child_hessian"] = classifier.min_child_hessian;
  cls["base_logit"] = classifier.base_logit;
  j["classifier"] = cls;

  json proto;
  proto["k"] = protocol.k;
  proto["seeds"] = protocol.seeds;
  proto["early_stop_fraction"] = protocol.early_stop_fraction;
  j["protocol"] = proto;

  j["output_dir"] = output_dir;
  j["cache_dir"] = cache_dir;
  j["subgroups"] = subgroups;
  j["permutation"] = permutation;
  j["jobs"] = jobs;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    if (j.contains("cohort")) {
      const json& cohort = j.at("cohort");
      c.cohort_path = cohort.value("path", c.cohort_path);
      c.cohort_format = cohort.value("format", c.cohort_format);
      c.labs_path = cohort.value("labs_path", c.labs_path);
      if (cohort.contains("synth")) {
        const json& s = cohort.at("synth");
        c.synth.seed = s.value("seed", c.synth.seed);
        c.synth.n = s.value("n", c.synth.n);
        c.synth.prevalence = s.value("prevalence", c.synth.prevalence);
        c.synth.w_seizure = s.value("w_seizure", c.synth.w_seizure);
        c.synth.w_gcs = s.value("w_gcs", c.synth.w_gcs);
        c.synth.w_surgery = s.value("w_surgery", c.synth.w_surgery);
        c.synth.w_icu = s.value("w_icu", c.synth.w_icu);
        c.synth.noise_scale = s.value("noise_scale", c.synth.noise_scale);
        c.synth.mask_fraction = s.value("mask_fraction", c.synth.mask_fraction);
        c.synth.imaging_availability =
            s.value("imaging_availability", c.synth.imaging_availability);
        c.synth.text_only_signal = s.value("text_only_signal", c.synth.text_only_signal);
      }
    }
    if (j.contains("backend")) {
      const json& b = j.at("backend");
      c.backend.backend_id = b.value("backend_id", c.backend.backend_id);
      std::string kind = b.value("kind", std::string("hash"));
      if (kind == "hash")
        c.backend.kind = BackendKind::kHash;
      else if (kind == "remote")
        c.backend.kind = BackendKind::kRemote;
      else
        throw ConfigError("unknown backend kind: " + kind);
      c.backend.dim = b.value("dim", c.backend.dim);
      c.backend.endpoint = b.value("endpoint", c.backend.endpoint);
      c.backend.max_batch = b.value("max_batch", c.backend.max_batch);
      c.backend.timeout_ms = b.value("timeout_ms", c.backend.timeout_ms);
      c.backend.max_retries = b.value("max_retries", c.backend.max_retries);
      c.backend.max_in_flight = b.value("max_in_flight", c.backend.max_in_flight);
      std::string level = b.value("level", std::string("token"));
      if (level == "token")
        c.backend.level = ResponseLevel::kToken;
      else if (level == "pooled")
        c.backend.level = ResponseLevel::kPooled;
      else
        throw ConfigError("unknown backend level: " + level);
      c.backend.pooled_strategy = pooling_from_name(b.value("pooled_strategy", std::string("mean")));
      c.backend.hash_seed = b.value("hash_seed", c.backend.hash_seed);
    }
    c.pooling = j.value("pooling", c.pooling);
    c.fusion = j.value("fusion", c.fusion);
    if (j.contains("classifier")) {
      const json& cls = j.at("classifier");
      c.classifier.learning_rate = cls.value("learning_rate", c.classifier.learning_rate);
      c.classifier.max_depth = cls.value("max_depth", c.classifier.max_depth);
      c.classifier.l1_alpha = cls.value("l1_alpha", c.classifier.l1_alpha);
      c.classifier.l2_lambda = cls.value("l2_lambda", c.classifier.l2_lambda);
      c.classifier.max_rounds = cls.value("max_rounds", c.classifier.max_rounds);
      c.classifier.early_stop_rounds =
          cls.value("early_stop_rounds", c.classifier.early_stop_rounds);
      c.classifier.min_child_hessian =
          cls.value("min_child_hessian", c.classifier.min_child_hessian);
      c.classifier.base_logit = cls.value("base_logit", c.classifier.base_logit);
    }
    if (j.contains("protocol")) {
      const json& p = j.at("protocol");
      c.protocol.k = p.value("k", c.protocol.k);
      if (p.contains("seeds")) c.protocol.seeds = p.at("seeds").get<std::vector<uint64_t>>();
      c.protocol.early_stop_fraction =
          p.value("early_stop_fraction", c.protocol.early_stop_fraction);
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    c.cache_dir = j.value("cache_dir", c.cache_dir);
    c.subgroups = j.value("subgroups", c.subgroups);
    c.permutation = j.value("permutation", c.permutation);
    c.jobs = j.value("jobs", c.jobs);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  // Sanity not deferred to first use.
  pooling_from_name(c.pooling);
  fusion_from_name(c.fusion);
  cohort_format_from_name(c.cohort_format);
  if (c.protocol.k < 2) throw ConfigError("protocol.k must be >= 2");
  if (c.protocol.seeds.empty()) throw ConfigError("protocol.seeds must be non-empty");
  if (c.protocol.early_stop_fraction <= 0.0 || c.protocol.early_stop_fraction >= 0.5)
    throw ConfigError("protocol.early_stop_fraction must lie in (0, 0.5)");
  if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return from_json(j);
}

std::string RunConfig::fingerprint() const { return sha256_hex(to_json().dump()); }

Cohort RunConfig::resolve_cohort() const {
  if (cohort_path.empty()) return generate_synthetic_cohort(synth);
  LoadResult loaded = load_cohort(cohort_path, cohort_format_from_name(cohort_format));
  for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
  if (!labs_path.empty()) attach_lab_long_table(loaded.cohort, labs_path);
  Cohort cohort = apply_inclusion(loaded.cohort);
  validate_cohort(cohort, /*require_both_classes=*/true);
  return cohort;
}

RunConfig default_config() {
  RunConfig c;
  c.backend.backend_id = "hash-v1";
  c.backend.kind = BackendKind::kHash;
  c.backend.dim = 256;
  return c;
}

}  // namespace pterisk
