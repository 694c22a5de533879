#include "pterisk/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pterisk/errors.hpp"
#include "pterisk/hashing.hpp"
#include "pterisk/io_util.hpp"
#include "pterisk/rng.hpp"
#include "pterisk/serializer.hpp"

namespace pterisk {

using json = nlohmann::ordered_json;

FoldPlan stratified_kfold(const std::vector<int>& labels, int k, uint64_t seed) {
  if (k < 2) throw ConfigError("stratified k-fold needs k >= 2");
  std::vector<int> pos, neg;
  for (size_t i = 0; i < labels.size(); ++i)
    (labels[i] ? pos : neg).push_back(static_cast<int>(i));
  if (static_cast<int>(pos.size()) < k || static_cast<int>(neg.size()) < k)
    throw DataError("each class needs at least k subjects for stratified k-fold");

  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.assign(labels.size(), -1);
  for (size_t i = 0; i < pos.size(); ++i)
    plan.assignment[static_cast<size_t>(pos[i])] = static_cast<int>(i % static_cast<size_t>(k));
  for (size_t i = 0; i < neg.size(); ++i)
    plan.assignment[static_cast<size_t>(neg[i])] = static_cast<int>(i % static_cast<size_t>(k));
  return plan;
}

CohortEmbeddings embed_cohort(const Cohort& cohort, Embedder& embedder, PoolingStrategy pooling,
                              bool concatenated) {
  const BackendDescriptor& d = embedder.descriptor();
  if (!backend_supports_pooling(d, pooling))
    throw ConfigError("backend '" + d.backend_id + "' does not support '" +
                      pooling_name(pooling) + "' pooling");

  CohortEmbeddings out;
  out.backend_id = d.backend_id;
  out.pooling = pooling;
  out.concatenated = concatenated;
  const auto n = static_cast<Eigen::Index>(cohort.subjects.size());

  std::vector<std::string> texts;
  if (concatenated) {
    texts.reserve(cohort.subjects.size());
    for (const Subject& s : cohort.subjects) {
      auto paragraphs = serialize_all(s);
      texts.push_back(
          concatenate_paragraphs({paragraphs.begin(), paragraphs.end()}).text);
    }
    auto matrices = embedder.embed_texts(texts);
    out.combined.resize(n, d.dim);
    for (Eigen::Index i = 0; i < n; ++i)
      out.combined.row(i) = pool(matrices[static_cast<size_t>(i)], pooling).transpose();
    return out;
  }

  texts.reserve(cohort.subjects.size() * kAspectCount);
  for (const Subject& s : cohort.subjects)
    for (const auto& p : serialize_all(s)) texts.push_back(p.text);
  auto matrices = embedder.embed_texts(texts);
  for (size_t a = 0; a < kAspectCount; ++a) out.per_aspect[a].resize(n, d.dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (size_t a = 0; a < kAspectCount; ++a)
      out.per_aspect[a].row(i) =
          pool(matrices[static_cast<size_t>(i) * kAspectCount + a], pooling).transpose();
  return out;
}

AggregateStat aggregate_values(const std::vector<double>& values) {
  AggregateStat s;
  if (values.empty()) return s;
  double sum = std::accumulate(values.begin(), values.end(), 0.0);
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

namespace {

// Stratified inner split of the training partition: the early-stopping set
// never overlaps the held-out fold.
void split_early_stop(const std::vector<int>& train_rows, const std::vector<int>& labels,
                      double fraction, uint64_t seed, std::vector<int>& fit_rows,
                      std::vector<int>& stop_rows) {
  std::vector<int> pos, neg;
  for (int r : train_rows) (labels[static_cast<size_t>(r)] ? pos : neg).push_back(r);
  if (pos.size() < 2 || neg.size() < 2)
    throw DataError("training partition too small to carve out an early-stopping set");
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  auto take = [&](std::vector<int>& cls) {
    auto want = static_cast<size_t>(std::llround(fraction * static_cast<double>(cls.size())));
    want = std::clamp<size_t>(want, 1, cls.size() - 1);
    for (size_t i = 0; i < cls.size(); ++i)
      (i < want ? stop_rows : fit_rows).push_back(cls[i]);
  };
  take(pos);
  take(neg);
  // Row order within partitions is positional for deterministic accumulation.
  std::sort(fit_rows.begin(), fit_rows.end());
  std::sort(stop_rows.begin(), stop_rows.end());
}

uint64_t derive_seed(uint64_t seed, uint64_t salt) {
  return splitmix64(seed * 0x9e3779b97f4a7c15ull + salt + 1);
}

std::array<PooledEmbedding, kAspectCount> embeddings_row(const CohortEmbeddings& emb,
                                                         Eigen::Index row) {
  std::array<PooledEmbedding, kAspectCount> out;
  for (size_t a = 0; a < kAspectCount; ++a) {
    out[a].aspect = kAspectOrder[a];
    out[a].strategy = emb.pooling;
    out[a].backend_id = emb.backend_id;
    if (emb.per_aspect[a].rows() > 0) out[a].vector = emb.per_aspect[a].row(row);
  }
  return out;
}

struct FoldFeatures {
  std::vector<std::string> names;
  Eigen::MatrixXd matrix;  // cohort-aligned rows
  std::vector<std::pair<AspectId, PcaModel>> pca_models;
};

// PCA models are fit on training-partition rows only; every subject is then
// projected with those frozen models.
FoldFeatures build_fold_features(const Cohort& cohort, const CohortEmbeddings& emb,
                                 const ExperimentConfig& config,
                                 const std::vector<int>& train_rows) {
  const auto n = static_cast<Eigen::Index>(cohort.subjects.size());
  FoldFeatures out;

  auto fit_on_rows = [&](const Eigen::MatrixXf& source, AspectId aspect) {
    Eigen::MatrixXd train(static_cast<Eigen::Index>(train_rows.size()), source.cols());
    for (size_t i = 0; i < train_rows.size(); ++i)
      train.row(static_cast<Eigen::Index>(i)) = source.row(train_rows[i]).cast<double>();
    return fit_pca(train, config.pca_components, aspect);
  };

  if (config.concatenated_paragraphs) {
    PcaModel model = fit_on_rows(emb.combined, AspectId::kGcs);
    out.pca_models.emplace_back(AspectId::kGcs, model);
    out.matrix.resize(n, model.retained());
    for (Eigen::Index i = 0; i < n; ++i)
      out.matrix.row(i) =
          transform_pca(model, emb.combined.row(i).cast<double>().transpose()).transpose();
    for (Eigen::Index j = 0; j < model.retained(); ++j) {
      char name[48];
      std::snprintf(name, sizeof(name), "emb.combined.pc%02d", static_cast<int>(j));
      out.names.push_back(name);
    }
    return out;
  }

  PcaByAspect pca;
  std::vector<AspectId> needed;
  if (config.single_aspect)
    needed = {*config.single_aspect};
  else
    needed = embedding_aspects(config.fusion);
  for (AspectId a : needed) {
    pca[static_cast<size_t>(a)] = fit_on_rows(emb.per_aspect[static_cast<size_t>(a)], a);
    out.pca_models.emplace_back(a, *pca[static_cast<size_t>(a)]);
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const Subject& subject = cohort.subjects[static_cast<size_t>(i)];
    FeatureVector fv =
        config.single_aspect
            ? assemble_single_aspect(*config.single_aspect,
                                     embeddings_row(emb, i)[static_cast<size_t>(*config.single_aspect)],
                                     pca)
            : assemble_features(subject, config.fusion, embeddings_row(emb, i), pca);
    if (i == 0) {
      out.names = fv.names;
      out.matrix.resize(n, fv.values.size());
    }
    if (fv.values.size() != out.matrix.cols())
      throw DataError("feature width changed between subjects");
    out.matrix.row(i) = fv.values.transpose();
  }
  return out;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<int>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(labels[static_cast<size_t>(r)]);
  return out;
}

json params_to_json(const gbdt::TrainParams& p) {
  json j;
  j["learning_rate"] = p.learning_rate;
  j["max_depth"] = p.max_depth;
  j["l1_alpha"] = p.l1_alpha;
  j["l2_lambda"] = p.l2_lambda;
  j["max_rounds"] = p.max_rounds;
  j["early_stop_rounds"] = p.early_stop_rounds;
  j["min_child_hessian"] = p.min_child_hessian;
  j["base_logit"] = p.base_logit;
  return j;
}

ExperimentResult run_protocol(const Cohort& cohort, const CohortEmbeddings& embeddings,
                              const ExperimentConfig& config) {
  validate_cohort(cohort, /*require_both_classes=*/true);
  const auto n = cohort.subjects.size();

  std::vector<int> base_labels;
  base_labels.reserve(n);
  for (const Subject& s : cohort.subjects) base_labels.push_back(s.label ? 1 : 0);

  ExperimentResult result;
  ExperimentReport& report = result.report;
  report.name = config.name;
  report.config_fingerprint = config.fingerprint;
  report.backend_id = embeddings.backend_id;
  report.pooling = pooling_name(config.pooling);
  report.fusion = config.single_aspect
                      ? "single_aspect:" + aspect_name(*config.single_aspect)
                      : fusion_name(config.fusion);
  report.metadata["protocol"] = {
      {"k", config.protocol.k},
      {"seeds", config.protocol.seeds},
      {"early_stop", {{"metric", "weighted_logloss"},
                      {"split", "train_internal_stratified"},
                      {"fraction", config.protocol.early_stop_fraction}}},
      {"pca", {{"components", config.pca_components}, {"fit", "train_partition_per_fold"}}},
      {"permuted_labels", config.permuted_labels},
      {"concatenated_paragraphs", config.concatenated_paragraphs},
  };
  report.metadata["classifier"] = params_to_json(config.classifier);

  for (uint64_t seed : config.protocol.seeds) {
    std::vector<int> labels = base_labels;
    if (config.permuted_labels) {
      Rng rng(derive_seed(seed, 0xfeedull));
      rng.shuffle(labels);
    }

    FoldPlan plan = stratified_kfold(labels, config.protocol.k, seed);
    std::vector<double> pooled_preds(n, 0.0);

    for (int fold = 0; fold < config.protocol.k; ++fold) {
      try {
        std::vector<int> train_rows, valid_rows;
        for (size_t i = 0; i < n; ++i)
          (plan.assignment[i] == fold ? valid_rows : train_rows).push_back(static_cast<int>(i));

        // Leakage-guard hook: rewrite held-out embedding rows after fold
        // planning, leaving the training partition untouched.
        const CohortEmbeddings* emb_in = &embeddings;
        CohortEmbeddings perturbed;
        if (config.perturb_validation_embeddings) {
          perturbed = embeddings;
          for (int r : valid_rows) {
            for (size_t a = 0; a < kAspectCount; ++a) {
              if (perturbed.per_aspect[a].rows() == 0) continue;
              Eigen::VectorXf row = perturbed.per_aspect[a].row(r);
              perturbed.per_aspect[a].row(r) =
                  config.perturb_validation_embeddings(row, kAspectOrder[a]).transpose();
            }
            if (perturbed.combined.rows() != 0) {
              Eigen::VectorXf row = perturbed.combined.row(r);
              perturbed.combined.row(r) =
                  config.perturb_validation_embeddings(row, AspectId::kGcs).transpose();
            }
          }
          emb_in = &perturbed;
        }

        FoldFeatures features = build_fold_features(cohort, *emb_in, config, train_rows);

        std::vector<int> fit_rows, stop_rows;
        split_early_stop(train_rows, labels, config.protocol.early_stop_fraction,
                         derive_seed(seed, static_cast<uint64_t>(fold)), fit_rows, stop_rows);

        gbdt::TrainParams params = config.classifier;
        std::vector<int> fit_labels = gather_labels(labels, fit_rows);
        params.scale_pos_weight = gbdt::compute_class_weight(fit_labels);

        gbdt::BoostedModel model =
            gbdt::train(gather_rows(features.matrix, fit_rows), fit_labels,
                        gather_rows(features.matrix, stop_rows), gather_labels(labels, stop_rows),
                        params);

        if (config.capture_artifacts) {
          FoldArtifacts fa;
          fa.seed = seed;
          fa.fold = fold;
          fa.pca_models = features.pca_models;
          fa.model_json = gbdt::model_to_json(model);
          result.artifacts.push_back(std::move(fa));
        }

        Eigen::MatrixXd valid_X = gather_rows(features.matrix, valid_rows);
        Eigen::VectorXd preds = gbdt::predict_proba_batch(model, valid_X);

        std::vector<double> scores(preds.data(), preds.data() + preds.size());
        FoldResult fr;
        fr.seed = seed;
        fr.fold = fold;
        fr.metrics = compute_metrics(scores, gather_labels(labels, valid_rows));
        report.per_fold.push_back(fr);

        for (size_t i = 0; i < valid_rows.size(); ++i)
          pooled_preds[static_cast<size_t>(valid_rows[i])] = scores[i];
      } catch (const DataError& e) {
        throw DataError("experiment '" + config.name + "', seed " + std::to_string(seed) +
                        ", fold " + std::to_string(fold) + ": " + e.what());
      }
    }
    result.predictions_by_seed.push_back(std::move(pooled_preds));
    result.labels_by_seed.push_back(std::move(labels));
  }

  std::vector<double> auroc_v, auprc_v, p30_v, p50_v;
  for (const FoldResult& fr : report.per_fold) {
    auroc_v.push_back(fr.metrics.auroc);
    auprc_v.push_back(fr.metrics.auprc);
    p30_v.push_back(fr.metrics.ppv_at_recall_30);
    p50_v.push_back(fr.metrics.ppv_at_recall_50);
  }
  report.aggregate["auroc"] = aggregate_values(auroc_v);
  report.aggregate["auprc"] = aggregate_values(auprc_v);
  report.aggregate["ppv_at_recall_30"] = aggregate_values(p30_v);
  report.aggregate["ppv_at_recall_50"] = aggregate_values(p50_v);
  return result;
}

}  // namespace

ExperimentResult run_experiment(const Cohort& cohort, const CohortEmbeddings& embeddings,
                                const ExperimentConfig& config) {
  if (config.permuted_labels)
    throw ConfigError("use permutation_baseline for permuted-label runs");
  return run_protocol(cohort, embeddings, config);
}

ExperimentResult permutation_baseline(const Cohort& cohort, const CohortEmbeddings& embeddings,
                                      ExperimentConfig config) {
  config.permuted_labels = true;
  if (config.name.find("permutation") == std::string::npos)
    config.name += "_permutation";
  return run_protocol(cohort, embeddings, config);
}

ExperimentResult single_aspect_experiment(const Cohort& cohort,
                                          const CohortEmbeddings& embeddings, AspectId aspect,
                                          ExperimentConfig config) {
  config.single_aspect = aspect;
  config.name += "_aspect_" + aspect_name(aspect);
  return run_protocol(cohort, embeddings, config);
}

std::vector<int> imaging_available_indices(const Cohort& cohort) {
  std::vector<int> out;
  for (size_t i = 0; i < cohort.subjects.size(); ++i) {
    const ImagingNotes& img = cohort.subjects[i].imaging;
    if (img.ct_report || img.mri_report) out.push_back(static_cast<int>(i));
  }
  return out;
}

Cohort filter_imaging_available(const Cohort& cohort) {
  Cohort out;
  out.provenance = cohort.provenance;
  out.generator_seed = cohort.generator_seed;
  for (int i : imaging_available_indices(cohort))
    out.subjects.push_back(cohort.subjects[static_cast<size_t>(i)]);
  return out;
}

std::vector<SubgroupSpec> default_subgroups() {
  std::vector<SubgroupSpec> specs;
  auto add = [&](std::string group, std::string category,
                 std::function<std::optional<bool>(const Subject&)> pred) {
    specs.push_back({std::move(group), std::move(category), std::move(pred)});
  };
  add("age", "<=65", [](const Subject& s) { return s.history.age_years <= 65; });
  add("age", ">65", [](const Subject& s) { return s.history.age_years > 65; });
  add("icu_admission", "no", [](const Subject& s) { return !s.course.icu_admitted; });
  add("icu_admission", "yes", [](const Subject& s) { return s.course.icu_admitted; });
  add("cranial_surgery", "no", [](const Subject& s) { return !s.course.surgery_performed; });
  add("cranial_surgery", "yes", [](const Subject& s) { return s.course.surgery_performed; });
  add("min_gcs_total", "<9", [](const Subject& s) -> std::optional<bool> {
    if (!s.gcs.total_worst) return std::nullopt;
    return *s.gcs.total_worst < 9;
  });
  add("min_gcs_total", ">=9", [](const Subject& s) -> std::optional<bool> {
    if (!s.gcs.total_worst) return std::nullopt;
    return *s.gcs.total_worst >= 9;
  });
  add("acute_seizure", "no", [](const Subject& s) { return !s.course.acute_seizure_7d; });
  add("acute_seizure", "yes", [](const Subject& s) { return s.course.acute_seizure_7d; });
  return specs;
}

std::vector<SubgroupResult> subgroup_eval(const Cohort& cohort, const ExperimentResult& result,
                                          const std::vector<SubgroupSpec>& specs) {
  std::vector<SubgroupResult> out;
  for (const SubgroupSpec& spec : specs) {
    SubgroupResult r;
    r.group = spec.group;
    r.category = spec.category;
    std::vector<size_t> members;
    for (size_t i = 0; i < cohort.subjects.size(); ++i) {
      auto in = spec.predicate(cohort.subjects[i]);
      if (in && *in) members.push_back(i);
    }
    r.n = static_cast<int>(members.size());
    for (size_t i : members) r.n_pte += cohort.subjects[i].label ? 1 : 0;

    bool defined = r.n_pte > 0 && r.n_pte < r.n;
    if (defined) {
      std::vector<double> per_seed;
      for (size_t s = 0; s < result.predictions_by_seed.size(); ++s) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (size_t i : members) {
          scores.push_back(result.predictions_by_seed[s][i]);
          labels.push_back(result.labels_by_seed[s][i]);
        }
        per_seed.push_back(auroc(scores, labels));
      }
      r.auroc = aggregate_values(per_seed);
    }
    out.push_back(std::move(r));
  }
  return out;
}

AblationBundle ablation_suite(const Cohort& cohort, Embedder& embedder,
                              const ExperimentConfig& base) {
  AblationBundle bundle;

  CohortEmbeddings mean_emb = embed_cohort(cohort, embedder, PoolingStrategy::kMean, false);

  // The paper's input/pooling ablations run on the embeddings-only pipeline;
  // identical seeds give identical fold plans, so comparisons are paired.
  ExperimentConfig proposed = base;
  proposed.name = base.name + "_per_aspect_mean";
  proposed.fusion = FusionStrategy::kEmbeddingsOnly;
  proposed.pooling = PoolingStrategy::kMean;
  proposed.concatenated_paragraphs = false;
  bundle.reports.push_back(run_experiment(cohort, mean_emb, proposed).report);

  ExperimentConfig concat = proposed;
  concat.name = base.name + "_concatenated_mean";
  concat.concatenated_paragraphs = true;
  CohortEmbeddings concat_emb = embed_cohort(cohort, embedder, PoolingStrategy::kMean, true);
  bundle.reports.push_back(run_experiment(cohort, concat_emb, concat).report);

  for (PoolingStrategy pooling : {PoolingStrategy::kCls, PoolingStrategy::kMax}) {
    ExperimentConfig variant = proposed;
    variant.name = base.name + "_per_aspect_" + pooling_name(pooling);
    variant.pooling = pooling;
    CohortEmbeddings emb = embed_cohort(cohort, embedder, pooling, false);
    bundle.reports.push_back(run_experiment(cohort, emb, variant).report);
  }
  return bundle;
}

// --- report emission --------------------------------------------------------

json ExperimentReport::to_json() const {
  json j;
  j["name"] = name;
  j["config_fingerprint"] = config_fingerprint;
  j["backend_id"] = backend_id;
  j["pooling"] = pooling;
  j["fusion"] = fusion;
  j["metadata"] = metadata;
  json folds = json::array();
  for (const FoldResult& fr : per_fold) {
    folds.push_back(json{{"seed", fr.seed},
                         {"fold", fr.fold},
                         {"auroc", fr.metrics.auroc},
                         {"auprc", fr.metrics.auprc},
                         {"ppv_at_recall_30", fr.metrics.ppv_at_recall_30},
                         {"ppv_at_recall_50", fr.metrics.ppv_at_recall_50}});
  }
  j["per_fold"] = folds;
  json agg;
  for (const auto& [metric, stat] : aggregate)
    agg[metric] = json{{"mean", stat.mean}, {"std", stat.std}};
  j["aggregate"] = agg;
  return j;
}

std::string ExperimentReport::summary_csv_row() const {
  std::vector<std::string> row = {name, fusion, pooling, backend_id};
  for (const char* metric : {"auprc", "auroc", "ppv_at_recall_30", "ppv_at_recall_50"}) {
    auto it = aggregate.find(metric);
    if (it == aggregate.end()) {
      row.emplace_back();
      row.emplace_back();
    } else {
      row.push_back(format_double_roundtrip(it->second.mean));
      row.push_back(format_double_roundtrip(it->second.std));
    }
  }
  return render_csv_row(row);
}

std::string reports_summary_csv(const std::vector<ExperimentReport>& reports) {
  std::string out = render_csv_row({"name", "fusion", "pooling", "backend_id", "auprc_mean",
                                    "auprc_std", "auroc_mean", "auroc_std",
                                    "ppv_at_recall_30_mean", "ppv_at_recall_30_std",
                                    "ppv_at_recall_50_mean", "ppv_at_recall_50_std"});
  for (const auto& r : reports) out += r.summary_csv_row();
  return out;
}

std::string reports_long_csv(const std::vector<ExperimentReport>& reports) {
  std::string out =
      render_csv_row({"name", "seed", "fold", "auprc", "auroc", "ppv_at_recall_30",
                      "ppv_at_recall_50"});
  for (const auto& r : reports)
    for (const FoldResult& fr : r.per_fold)
      out += render_csv_row({r.name, std::to_string(fr.seed), std::to_string(fr.fold),
                             format_double_roundtrip(fr.metrics.auprc),
                             format_double_roundtrip(fr.metrics.auroc),
                             format_double_roundtrip(fr.metrics.ppv_at_recall_30),
                             format_double_roundtrip(fr.metrics.ppv_at_recall_50)});
  return out;
}

json subgroups_to_json(const std::vector<SubgroupResult>& results) {
  json j = json::array();
  for (const SubgroupResult& r : results) {
    json entry;
    entry["group"] = r.group;
    entry["category"] = r.category;
    entry["n"] = r.n;
    entry["n_pte"] = r.n_pte;
    if (r.auroc)
      entry["auroc"] = json{{"mean", r.auroc->mean}, {"std", r.auroc->std}};
    else
      entry["auroc"] = "undefined";
    j.push_back(entry);
  }
  return j;
}

}  // namespace pterisk
