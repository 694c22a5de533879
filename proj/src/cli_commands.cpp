#include <iostream>

#include <CLI11.hpp>

#include "pterisk/cli.hpp"
#include "pterisk/errors.hpp"
#include "pterisk/io_util.hpp"

namespace pterisk::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void write_cohort(const Cohort& cohort, const fs::path& out, const std::string& format) {
  if (cohort_format_from_name(format) == CohortFormat::kDelimitedTable)
    save_cohort_csv(cohort, out);
  else
    save_cohort_jsonl(cohort, out);
}

std::vector<ParagraphRecord> serialize_cohort(const Cohort& cohort) {
  std::vector<ParagraphRecord> records;
  records.reserve(cohort.subjects.size() * kAspectCount);
  for (const Subject& s : cohort.subjects)
    for (const AspectParagraph& p : serialize_all(s)) records.push_back({s.subject_id, p});
  return records;
}

Embedder make_embedder(const RunConfig& config, std::unique_ptr<EmbeddingCache>& cache,
                       std::shared_ptr<EmbeddingBackend>& backend, bool default_cache) {
  BackendDescriptor d = config.backend;
  d.max_in_flight = std::clamp(d.max_in_flight, 1, config.jobs);
  backend = make_backend(d);
  std::string cache_dir = config.cache_dir;
  if (cache_dir.empty() && default_cache)
    cache_dir = (fs::path(config.output_dir) / "cache").string();
  if (!cache_dir.empty()) cache = std::make_unique<EmbeddingCache>(cache_dir);
  return Embedder(backend, cache.get());
}

ExperimentConfig experiment_config(const RunConfig& config) {
  ExperimentConfig ec;
  ec.name = config.fusion;
  ec.fusion = fusion_from_name(config.fusion);
  ec.pooling = pooling_from_name(config.pooling);
  ec.classifier = config.classifier;
  ec.protocol = config.protocol;
  ec.fingerprint = config.fingerprint();
  return ec;
}

void print_aggregate(const ExperimentReport& report) {
  std::cout << report.name << ":";
  for (const char* metric : {"auprc", "auroc", "ppv_at_recall_30", "ppv_at_recall_50"}) {
    auto it = report.aggregate.find(metric);
    if (it == report.aggregate.end()) continue;
    char buf[96];
    std::snprintf(buf, sizeof(buf), " %s %.3f +- %.3f", metric, it->second.mean,
                  it->second.std);
    std::cout << buf;
  }
  std::cout << "\n";
}

}  // namespace

void cmd_synth(const RunConfig& config, const fs::path& out, const std::string& format) {
  Cohort cohort = generate_synthetic_cohort(config.synth);
  write_cohort(cohort, out, format);
  size_t pos = 0;
  for (const Subject& s : cohort.subjects) pos += s.label ? 1 : 0;
  std::cout << "wrote " << cohort.subjects.size() << " subjects (" << pos << " PTE, "
            << cohort.subjects.size() - pos << " non-PTE) to " << out.string() << "\n";
}

void cmd_ingest(const RunConfig& config, const fs::path& in, const std::string& format,
                const std::string& labs, const fs::path& out) {
  (void)config;
  LoadResult loaded = load_cohort(in, cohort_format_from_name(format));
  for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
  if (!labs.empty()) attach_lab_long_table(loaded.cohort, labs);
  size_t raw_count = loaded.cohort.subjects.size();
  Cohort cohort = apply_inclusion(loaded.cohort);
  validate_cohort(cohort, /*require_both_classes=*/false);
  save_cohort_jsonl(cohort, out);
  size_t pos = 0;
  for (const Subject& s : cohort.subjects) pos += s.label ? 1 : 0;
  std::cout << "ingested " << raw_count << " records; retained " << cohort.subjects.size()
            << " (" << pos << " PTE); excluded " << raw_count - cohort.subjects.size() << "\n";
}

void cmd_serialize(const RunConfig& config, const fs::path& cohort_path,
                   const std::string& format, const fs::path& out) {
  Cohort cohort;
  if (cohort_path.empty()) {
    cohort = config.resolve_cohort();
  } else {
    LoadResult loaded = load_cohort(cohort_path, cohort_format_from_name(format));
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    cohort = apply_inclusion(loaded.cohort);
  }
  auto records = serialize_cohort(cohort);
  save_paragraphs(records, out);
  std::cout << "wrote " << records.size() << " paragraph records to " << out.string() << "\n";
}

void cmd_embed(const RunConfig& config, const fs::path& paragraphs_path, const fs::path& out) {
  auto records = load_paragraphs(paragraphs_path);
  std::unique_ptr<EmbeddingCache> cache;
  std::shared_ptr<EmbeddingBackend> backend;
  Embedder embedder = make_embedder(config, cache, backend, /*default_cache=*/true);
  PoolingStrategy pooling = pooling_from_name(config.pooling);
  if (!backend_supports_pooling(embedder.descriptor(), pooling))
    throw ConfigError("backend does not support pooling '" + config.pooling + "'");

  std::vector<std::string> texts;
  texts.reserve(records.size());
  for (const auto& r : records) texts.push_back(r.paragraph.text);
  auto matrices = embedder.embed_texts(texts);

  std::string body;
  for (size_t i = 0; i < records.size(); ++i) {
    Eigen::VectorXf pooled = pool(matrices[i], pooling);
    json j;
    j["subject_id"] = records[i].subject_id;
    j["aspect"] = aspect_name(records[i].paragraph.aspect);
    j["backend_id"] = embedder.descriptor().backend_id;
    j["pooling"] = config.pooling;
    j["dim"] = embedder.descriptor().dim;
    std::vector<float> values(pooled.data(), pooled.data() + pooled.size());
    j["vector"] = values;
    body += j.dump();
    body.push_back('\n');
  }
  atomic_write_file(out, body);
  std::cout << "embedded " << records.size() << " paragraphs to " << out.string() << "\n";
  if (cache)
    std::cout << "cache: " << cache->hits() << " hits, " << cache->misses() << " misses\n";
}

void cmd_evaluate(const RunConfig& config) {
  Cohort cohort = config.resolve_cohort();
  std::unique_ptr<EmbeddingCache> cache;
  std::shared_ptr<EmbeddingBackend> backend;
  Embedder embedder = make_embedder(config, cache, backend, /*default_cache=*/false);

  ExperimentConfig ec = experiment_config(config);
  CohortEmbeddings embeddings = embed_cohort(cohort, embedder, ec.pooling, false);

  std::vector<ExperimentReport> reports;
  ExperimentResult main_result = run_experiment(cohort, embeddings, ec);
  reports.push_back(main_result.report);
  print_aggregate(main_result.report);

  if (config.permutation) {
    ExperimentResult perm = permutation_baseline(cohort, embeddings, ec);
    reports.push_back(perm.report);
    print_aggregate(perm.report);
  }

  json doc;
  doc["config"] = config.to_json();
  doc["config_fingerprint"] = ec.fingerprint;
  json experiments = json::array();
  for (const auto& r : reports) experiments.push_back(r.to_json());
  doc["experiments"] = experiments;

  if (config.subgroups) {
    auto subgroup_results = subgroup_eval(cohort, main_result, default_subgroups());
    doc["subgroups"] = subgroups_to_json(subgroup_results);
  }

  fs::path out_dir(config.output_dir);
  atomic_write_file(out_dir / "report.json", doc.dump(2) + "\n");
  atomic_write_file(out_dir / "summary.csv", reports_summary_csv(reports));
  atomic_write_file(out_dir / "per_fold.csv", reports_long_csv(reports));
  std::cout << "reports written to " << out_dir.string() << "\n";
  if (cache)
    std::cout << "cache: " << cache->hits() << " hits, " << cache->misses() << " misses\n";
}

void cmd_ablate(const RunConfig& config) {
  Cohort cohort = config.resolve_cohort();
  std::unique_ptr<EmbeddingCache> cache;
  std::shared_ptr<EmbeddingBackend> backend;
  Embedder embedder = make_embedder(config, cache, backend, /*default_cache=*/false);

  ExperimentConfig ec = experiment_config(config);
  ec.name = "ablation";
  AblationBundle bundle = ablation_suite(cohort, embedder, ec);
  for (const auto& r : bundle.reports) print_aggregate(r);

  json doc;
  doc["config"] = config.to_json();
  doc["config_fingerprint"] = ec.fingerprint;
  json experiments = json::array();
  for (const auto& r : bundle.reports) experiments.push_back(r.to_json());
  doc["experiments"] = experiments;

  fs::path out_dir(config.output_dir);
  atomic_write_file(out_dir / "ablation_report.json", doc.dump(2) + "\n");
  atomic_write_file(out_dir / "ablation_summary.csv", reports_summary_csv(bundle.reports));
  atomic_write_file(out_dir / "ablation_per_fold.csv", reports_long_csv(bundle.reports));
  std::cout << "ablation reports written to " << out_dir.string() << "\n";
}

void cmd_report(const std::vector<fs::path>& report_files, const fs::path& out) {
  std::vector<ExperimentReport> reports;
  for (const auto& path : report_files) {
    json doc;
    try {
      doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw DataError("cannot parse report " + path.string() + ": " + e.what());
    }
    for (const json& exp : doc.at("experiments")) {
      ExperimentReport r;
      r.name = exp.at("name").get<std::string>();
      r.config_fingerprint = exp.value("config_fingerprint", "");
      r.backend_id = exp.value("backend_id", "");
      r.pooling = exp.value("pooling", "");
      r.fusion = exp.value("fusion", "");
      for (const json& fr : exp.at("per_fold")) {
        FoldResult f;
        f.seed = fr.at("seed").get<uint64_t>();
        f.fold = fr.at("fold").get<int>();
        f.metrics.auroc = fr.at("auroc").get<double>();
        f.metrics.auprc = fr.at("auprc").get<double>();
        f.metrics.ppv_at_recall_30 = fr.at("ppv_at_recall_30").get<double>();
        f.metrics.ppv_at_recall_50 = fr.at("ppv_at_recall_50").get<double>();
        r.per_fold.push_back(f);
      }
      for (const auto& [metric, stat] : exp.at("aggregate").items())
        r.aggregate[metric] = {stat.at("mean").get<double>(), stat.at("std").get<double>()};
      reports.push_back(std::move(r));
    }
  }
  std::string summary = reports_summary_csv(reports);
  if (out.empty())
    std::cout << summary;
  else
    atomic_write_file(out, summary);
}

int run(int argc, const char* const* argv) {
  CLI::App app{"PTE risk prediction pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration")->envname("PTERISK_CONFIG");

  // Shared overrides (flags > config > defaults).
  std::string output_dir, cache_dir, pooling, fusion;
  int jobs = 0;
  app.add_option("--output-dir", output_dir, "Output directory");
  app.add_option("--cache-dir", cache_dir, "Embedding cache directory");
  app.add_option("--pooling", pooling, "Pooling strategy: mean|cls|max");
  app.add_option("--fusion", fusion,
                 "Fusion strategy: tabular_only|embeddings_only|naive_fusion|modality_aware");
  app.add_option("--jobs", jobs, "Parallelism bound");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort file");
  std::string synth_out, synth_format = "csv";
  uint64_t synth_seed = 0;
  int synth_n = 0;
  double synth_prevalence = -1.0;
  synth_cmd->add_option("--out", synth_out, "Output cohort file");
  synth_cmd->add_option("--format", synth_format, "csv|jsonl");
  synth_cmd->add_option("--seed", synth_seed, "Generator seed");
  synth_cmd->add_option("--n", synth_n, "Cohort size");
  synth_cmd->add_option("--prevalence", synth_prevalence, "Positive fraction in (0,1)");

  auto* ingest_cmd = app.add_subcommand("ingest", "Validate and normalize a cohort file");
  std::string ingest_in, ingest_format = "csv", ingest_labs, ingest_out;
  ingest_cmd->add_option("--in", ingest_in, "Input cohort file")->required();
  ingest_cmd->add_option("--format", ingest_format, "delimited-table|structured-records");
  ingest_cmd->add_option("--labs", ingest_labs, "Long-format lab table");
  ingest_cmd->add_option("--out", ingest_out, "Normalized output (structured records)");

  auto* serialize_cmd = app.add_subcommand("serialize", "Render per-aspect paragraphs");
  std::string ser_in, ser_format = "csv", ser_out;
  serialize_cmd->add_option("--in", ser_in, "Cohort file (omit to use config source)");
  serialize_cmd->add_option("--format", ser_format, "delimited-table|structured-records");
  serialize_cmd->add_option("--out", ser_out, "Paragraph output file");

  auto* embed_cmd = app.add_subcommand("embed", "Embed serialized paragraphs");
  std::string embed_in, embed_out;
  embed_cmd->add_option("--in", embed_in, "Paragraph file")->required();
  embed_cmd->add_option("--out", embed_out, "Embedding output file");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Run the evaluation protocol");
  bool eval_permutation = false, eval_subgroups = false;
  evaluate_cmd->add_flag("--permutation", eval_permutation, "Add the permutation baseline");
  evaluate_cmd->add_flag("--subgroups", eval_subgroups, "Add the subgroup analysis");

  auto* ablate_cmd = app.add_subcommand("ablate", "Run input/pooling ablations");

  auto* report_cmd = app.add_subcommand("report", "Summarize report files");
  std::vector<std::string> report_inputs;
  std::string report_out;
  report_cmd->add_option("files", report_inputs, "Report JSON files")->required();
  report_cmd->add_option("--out", report_out, "Summary CSV output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig config = config_path.empty() ? default_config() : RunConfig::load(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (!cache_dir.empty()) config.cache_dir = cache_dir;
    if (!pooling.empty()) config.pooling = pooling;
    if (!fusion.empty()) config.fusion = fusion;
    if (jobs > 0) config.jobs = jobs;

    if (synth_cmd->parsed()) {
      if (synth_seed || synth_cmd->count("--seed")) config.synth.seed = synth_seed;
      if (synth_n > 0) config.synth.n = synth_n;
      if (synth_prevalence >= 0.0) config.synth.prevalence = synth_prevalence;
      fs::path out = synth_out.empty()
                         ? fs::path(config.output_dir) /
                               (synth_format == "jsonl" ? "cohort.jsonl" : "cohort.csv")
                         : fs::path(synth_out);
      cmd_synth(config, out, synth_format);
    } else if (ingest_cmd->parsed()) {
      fs::path out = ingest_out.empty() ? fs::path(config.output_dir) / "cohort_normalized.jsonl"
                                        : fs::path(ingest_out);
      cmd_ingest(config, ingest_in, ingest_format, ingest_labs, out);
    } else if (serialize_cmd->parsed()) {
      fs::path out = ser_out.empty() ? fs::path(config.output_dir) / "paragraphs.jsonl"
                                     : fs::path(ser_out);
      cmd_serialize(config, ser_in, ser_format, out);
    } else if (embed_cmd->parsed()) {
      fs::path out = embed_out.empty() ? fs::path(config.output_dir) / "embeddings.jsonl"
                                       : fs::path(embed_out);
      cmd_embed(config, embed_in, out);
    } else if (evaluate_cmd->parsed()) {
      if (eval_permutation) config.permutation = true;
      if (eval_subgroups) config.subgroups = true;
      cmd_evaluate(config);
    } else if (ablate_cmd->parsed()) {
      cmd_ablate(config);
    } else if (report_cmd->parsed()) {
      std::vector<fs::path> files(report_inputs.begin(), report_inputs.end());
      cmd_report(files, report_out.empty() ? fs::path() : fs::path(report_out));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << " (attempts: " << e.attempts << ")\n";
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace pterisk::cli
