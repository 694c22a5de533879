#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pterisk/cohort.hpp"
#include "pterisk/embedder.hpp"
#include "pterisk/pca.hpp"

namespace pterisk {

// NaN marks a missing entry; the classifier routes these natively.
inline constexpr double kMissingValue = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

enum class FeatureKind { kTabular, kEmbedding };

struct FeatureBlock {
  AspectId aspect = AspectId::kGcs;
  FeatureKind kind = FeatureKind::kTabular;
  std::vector<std::string> names;
  Eigen::VectorXd values;
};

enum class FusionStrategy { kTabularOnly, kEmbeddingsOnly, kNaiveFusion, kModalityAware };

const std::string& fusion_name(FusionStrategy s);
FusionStrategy fusion_from_name(const std::string& name);

// Modality-aware assignment is fixed: ct_findings, gcs, labs stay tabular;
// hospital_course, imaging_notes, history_demographics go through embeddings.
bool modality_aware_uses_embedding(AspectId aspect);

// Fixed one-hot vocabularies (an "other" bucket keeps widths data-independent).
const std::vector<std::string>& sex_vocabulary();
const std::vector<std::string>& race_vocabulary();
const std::vector<std::string>& surgery_type_vocabulary();

// One tabular block per aspect; identical name schema for every subject.
std::array<FeatureBlock, kAspectCount> encode_tabular(const Subject& subject);

struct FeatureVector {
  std::vector<std::string> names;
  Eigen::VectorXd values;
};

using PcaByAspect = std::array<std::optional<PcaModel>, kAspectCount>;

FeatureVector assemble_features(const Subject& subject, FusionStrategy strategy,
                                const std::array<PooledEmbedding, kAspectCount>& embeddings,
                                const PcaByAspect& pca);

// Single-aspect variant used by the contribution analyses.
FeatureVector assemble_single_aspect(AspectId aspect, const PooledEmbedding& embedding,
                                     const PcaByAspect& pca);

// Aspects whose embeddings participate under the strategy (these need a
// fitted PCA model).
std::vector<AspectId> embedding_aspects(FusionStrategy strategy);

// Delimited export: header row of feature names, one row per subject,
// missing entries as empty cells.
std::string feature_matrix_to_csv(const std::vector<std::string>& names,
                                  const Eigen::Ref<const Eigen::MatrixXd>& matrix,
                                  const std::vector<std::string>& subject_ids);

}  // namespace pterisk
