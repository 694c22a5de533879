#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pterisk/cohort.hpp"
#include "pterisk/embedder.hpp"
#include "pterisk/features.hpp"
#include "pterisk/gbdt.hpp"
#include "pterisk/metrics.hpp"

namespace pterisk {

struct FoldPlan {
  int k = 5;
  uint64_t seed = 0;
  std::vector<int> assignment;  // fold index per subject position
};

// Within each class, subjects are shuffled by the seeded generator and dealt
// round-robin, so per-fold class counts differ by at most one.
FoldPlan stratified_kfold(const std::vector<int>& labels, int k, uint64_t seed);

struct ProtocolParams {
  int k = 5;
  std::vector<uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  // Early stopping holds out this stratified fraction of the training
  // partition; the evaluation fold itself never touches training.
  double early_stop_fraction = 0.2;
};

struct ExperimentConfig {
  std::string name = "experiment";
  FusionStrategy fusion = FusionStrategy::kModalityAware;
  PoolingStrategy pooling = PoolingStrategy::kMean;
  bool concatenated_paragraphs = false;       // single-embedding ablation
  std::optional<AspectId> single_aspect;      // contribution analyses
  int pca_components = 16;
  gbdt::TrainParams classifier;               // scale_pos_weight filled per fold
  ProtocolParams protocol;
  bool permuted_labels = false;               // permutation baseline
  std::string fingerprint;                    // content hash of the run config

  // Test instrumentation. capture_artifacts stores each fold's fitted PCA
  // models and serialized ensemble; the perturbation hook rewrites the
  // embedding rows of held-out subjects after fold planning (leakage guard).
  bool capture_artifacts = false;
  std::function<Eigen::VectorXf(const Eigen::VectorXf&, AspectId)>
      perturb_validation_embeddings;
};

struct FoldArtifacts {
  uint64_t seed = 0;
  int fold = 0;
  std::vector<std::pair<AspectId, PcaModel>> pca_models;
  std::string model_json;
};

// Pooled per-subject embeddings for one (backend, pooling, input-shape)
// combination; rows align with the cohort.
struct CohortEmbeddings {
  std::string backend_id;
  PoolingStrategy pooling = PoolingStrategy::kMean;
  bool concatenated = false;
  std::array<Eigen::MatrixXf, kAspectCount> per_aspect;
  Eigen::MatrixXf combined;
};

CohortEmbeddings embed_cohort(const Cohort& cohort, Embedder& embedder,
                              PoolingStrategy pooling, bool concatenated);

struct FoldResult {
  uint64_t seed = 0;
  int fold = 0;
  MetricSet metrics;
};

struct AggregateStat {
  double mean = 0.0;
  double std = 0.0;  // population convention over (seed, fold) entries
};

struct ExperimentReport {
  std::string name;
  std::string config_fingerprint;
  std::string backend_id;
  std::string pooling;
  std::string fusion;
  nlohmann::ordered_json metadata;
  std::vector<FoldResult> per_fold;
  std::map<std::string, AggregateStat> aggregate;

  nlohmann::ordered_json to_json() const;
  std::string summary_csv_row() const;
};

AggregateStat aggregate_values(const std::vector<double>& values);

struct ExperimentResult {
  ExperimentReport report;
  // Held-out predictions pooled across folds, one full vector per seed.
  std::vector<std::vector<double>> predictions_by_seed;
  // Labels the protocol ran against (differ from cohort labels when permuted).
  std::vector<std::vector<int>> labels_by_seed;
  std::vector<FoldArtifacts> artifacts;  // populated when capture_artifacts
};

// The full protocol: per (seed, fold), per-aspect PCA and the classifier are
// fit on the training partition only; metrics come from the held-out fold.
ExperimentResult run_experiment(const Cohort& cohort, const CohortEmbeddings& embeddings,
                                const ExperimentConfig& config);

// Identical protocol with labels shuffled once per seed before fold planning.
ExperimentResult permutation_baseline(const Cohort& cohort, const CohortEmbeddings& embeddings,
                                      ExperimentConfig config);

// One aspect's embedding block as the only classifier input.
ExperimentResult single_aspect_experiment(const Cohort& cohort,
                                          const CohortEmbeddings& embeddings, AspectId aspect,
                                          ExperimentConfig config);

// Subjects with any imaging text, for the availability-subset analysis.
Cohort filter_imaging_available(const Cohort& cohort);
std::vector<int> imaging_available_indices(const Cohort& cohort);

// Subgroup AUROC over pooled held-out predictions: AUROC within the subgroup
// per seed, then mean +- std across seeds. Single-class subgroups are
// undefined.
struct SubgroupSpec {
  std::string group;     // e.g. "age"
  std::string category;  // e.g. "<=65"
  // Predicate over subjects; nullopt excludes the subject from the subgroup.
  std::function<std::optional<bool>(const Subject&)> predicate;
};

std::vector<SubgroupSpec> default_subgroups();

struct SubgroupResult {
  std::string group;
  std::string category;
  int n = 0;
  int n_pte = 0;
  std::optional<AggregateStat> auroc;  // nullopt = undefined (single class)
};

std::vector<SubgroupResult> subgroup_eval(const Cohort& cohort, const ExperimentResult& result,
                                          const std::vector<SubgroupSpec>& specs);

// Paired ablations (shared fold plans per seed): per-aspect vs concatenated
// input, and mean/cls/max pooling.
struct AblationBundle {
  std::vector<ExperimentReport> reports;
};

AblationBundle ablation_suite(const Cohort& cohort, Embedder& embedder,
                              const ExperimentConfig& base);

// Report emission: full JSON document, a summary table (one row per
// configuration), and a per-fold long-format table.
std::string reports_summary_csv(const std::vector<ExperimentReport>& reports);
std::string reports_long_csv(const std::vector<ExperimentReport>& reports);

nlohmann::ordered_json subgroups_to_json(const std::vector<SubgroupResult>& results);

}  // namespace pterisk
