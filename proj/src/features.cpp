#include "pterisk/features.hpp"

#include <algorithm>
#include <cctype>

#include "pterisk/errors.hpp"
#include "pterisk/io_util.hpp"

namespace pterisk {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double from_bool(bool v) { return v ? 1.0 : 0.0; }

double from_opt_bool(const std::optional<bool>& v) {
  return v ? from_bool(*v) : kMissingValue;
}

double from_opt_int(const std::optional<int>& v) {
  return v ? static_cast<double>(*v) : kMissingValue;
}

double from_opt_double(const std::optional<double>& v) { return v ? *v : kMissingValue; }

double from_tristate(TriState t) {
  switch (t) {
    case TriState::kPresent: return 1.0;
    case TriState::kAbsent: return 0.0;
    case TriState::kIndeterminate:
    case TriState::kNotReported: return kMissingValue;
  }
  return kMissingValue;
}

class BlockBuilder {
 public:
  BlockBuilder(AspectId aspect, FeatureKind kind, std::string prefix)
      : prefix_(std::move(prefix)) {
    block_.aspect = aspect;
    block_.kind = kind;
  }

  void add(const std::string& name, double value) {
    block_.names.push_back(prefix_ + "." + name);
    values_.push_back(value);
  }

  // One-hot over a fixed vocabulary plus "other"; a missing category marks
  // every slot missing, so the learner can route it natively.
  void add_one_hot(const std::string& name, const std::optional<std::string>& value,
                   const std::vector<std::string>& vocab) {
    std::optional<size_t> match;
    if (value) {
      std::string needle = lower(*value);
      for (size_t i = 0; i < vocab.size(); ++i)
        if (lower(vocab[i]) == needle) match = i;
      if (!match) match = vocab.size();  // "other"
    }
    for (size_t i = 0; i <= vocab.size(); ++i) {
      std::string slot = i < vocab.size() ? lower(vocab[i]) : std::string("other");
      std::replace(slot.begin(), slot.end(), ' ', '_');
      double v = value ? from_bool(match == i) : kMissingValue;
      add(name + "." + slot, v);
    }
  }

  void add_series(const std::string& name, const std::optional<SeriesSummary>& s) {
    add(name + ".first", s ? s->first : kMissingValue);
    add(name + ".last", s ? s->last : kMissingValue);
    add(name + ".min", s ? s->min : kMissingValue);
    add(name + ".max", s ? s->max : kMissingValue);
    add(name + ".mean", s ? s->mean : kMissingValue);
    add(name + ".std", s ? s->std : kMissingValue);
  }

  FeatureBlock finish() {
    block_.values = Eigen::Map<Eigen::VectorXd>(values_.data(),
                                                static_cast<Eigen::Index>(values_.size()));
    return std::move(block_);
  }

 private:
  std::string prefix_;
  FeatureBlock block_;
  std::vector<double> values_;
};

}  // namespace

const std::string& fusion_name(FusionStrategy s) {
  static const std::array<std::string, 4> names = {"tabular_only", "embeddings_only",
                                                   "naive_fusion", "modality_aware"};
  return names[static_cast<size_t>(s)];
}

FusionStrategy fusion_from_name(const std::string& name) {
  if (name == "tabular_only") return FusionStrategy::kTabularOnly;
  if (name == "embeddings_only") return FusionStrategy::kEmbeddingsOnly;
  if (name == "naive_fusion") return FusionStrategy::kNaiveFusion;
  if (name == "modality_aware") return FusionStrategy::kModalityAware;
  throw ConfigError("unknown fusion strategy: " + name);
}

bool modality_aware_uses_embedding(AspectId aspect) {
  switch (aspect) {
    case AspectId::kCtFindings:
    case AspectId::kGcs:
    case AspectId::kLabs: return false;
    case AspectId::kHospitalCourse:
    case AspectId::kImagingNotes:
    case AspectId::kHistoryDemographics: return true;
  }
  return false;
}

const std::vector<std::string>& sex_vocabulary() {
  static const std::vector<std::string> v = {"male", "female"};
  return v;
}

const std::vector<std::string>& race_vocabulary() {
  static const std::vector<std::string> v = {"White", "Black", "Asian", "Hispanic"};
  return v;
}

const std::vector<std::string>& surgery_type_vocabulary() {
  static const std::vector<std::string> v = {
      "Decompressive craniectomy",
      "Craniotomy with evacuation of subdural hematoma",
      "Craniotomy with evacuation of epidural hematoma",
      "Burr hole drainage",
      "ICP monitor placement",
      "Elevation of depressed skull fracture",
  };
  return v;
}

std::array<FeatureBlock, kAspectCount> encode_tabular(const Subject& s) {
  std::array<FeatureBlock, kAspectCount> blocks;

  {
    BlockBuilder b(AspectId::kGcs, FeatureKind::kTabular, "gcs");
    b.add("total_worst", from_opt_int(s.gcs.total_worst));
    b.add("total_best", from_opt_int(s.gcs.total_best));
    b.add("eye_worst", from_opt_int(s.gcs.eye_worst));
    b.add("eye_best", from_opt_int(s.gcs.eye_best));
    b.add("verbal_worst", from_opt_int(s.gcs.verbal_worst));
    b.add("verbal_best", from_opt_int(s.gcs.verbal_best));
    b.add("motor_worst", from_opt_int(s.gcs.motor_worst));
    b.add("motor_best", from_opt_int(s.gcs.motor_best));
    blocks[static_cast<size_t>(AspectId::kGcs)] = b.finish();
  }
  {
    BlockBuilder b(AspectId::kHospitalCourse, FeatureKind::kTabular, "course");
    b.add("icu_admitted", from_bool(s.course.icu_admitted));
    b.add("icu_days", from_opt_double(s.course.icu_days));
    b.add("surgery_performed", from_bool(s.course.surgery_performed));
    b.add("hours_to_surgery", from_opt_double(s.course.hours_to_surgery));
    b.add("acute_seizure_7d", from_bool(s.course.acute_seizure_7d));
    b.add("has_operative_note", from_bool(s.course.operative_note.has_value()));
    std::optional<std::string> surgery_type =
        s.course.surgery_performed ? s.course.surgery_type : std::optional<std::string>("none");
    b.add_one_hot("surgery_type", surgery_type, surgery_type_vocabulary());
    blocks[static_cast<size_t>(AspectId::kHospitalCourse)] = b.finish();
  }
  {
    BlockBuilder b(AspectId::kCtFindings, FeatureKind::kTabular, "ct");
    b.add("contusion", from_tristate(s.ct.contusion));
    b.add("epidural_hematoma", from_tristate(s.ct.epidural_hematoma));
    b.add("intracerebral_hemorrhage", from_tristate(s.ct.intracerebral_hemorrhage));
    b.add("skull_fracture", from_tristate(s.ct.skull_fracture));
    b.add("subarachnoid_hemorrhage", from_tristate(s.ct.subarachnoid_hemorrhage));
    b.add("marshall_score", from_opt_int(s.ct.marshall_score));
    blocks[static_cast<size_t>(AspectId::kCtFindings)] = b.finish();
  }
  {
    BlockBuilder b(AspectId::kImagingNotes, FeatureKind::kTabular, "imaging");
    b.add("has_ct_report", from_bool(s.imaging.ct_report.has_value()));
    b.add("has_mri_report", from_bool(s.imaging.mri_report.has_value()));
    blocks[static_cast<size_t>(AspectId::kImagingNotes)] = b.finish();
  }
  {
    BlockBuilder b(AspectId::kLabs, FeatureKind::kTabular, "labs");
    b.add_series("creatinine", s.labs.creatinine);
    b.add_series("lactate", s.labs.lactate);
    b.add_series("hemoglobin", s.labs.hemoglobin);
    b.add_series("paco2", s.labs.paco2);
    blocks[static_cast<size_t>(AspectId::kLabs)] = b.finish();
  }
  {
    BlockBuilder b(AspectId::kHistoryDemographics, FeatureKind::kTabular, "history");
    b.add("age_years", static_cast<double>(s.history.age_years));
    b.add_one_hot("sex", s.history.sex.empty() ? std::nullopt : std::optional(s.history.sex),
                  sex_vocabulary());
    b.add_one_hot("race", s.history.race.empty() ? std::nullopt : std::optional(s.history.race),
                  race_vocabulary());
    b.add("prior_epilepsy", from_opt_bool(s.history.prior_epilepsy));
    b.add("prior_seizures", from_opt_bool(s.history.prior_seizures));
    b.add("neurodegenerative", from_opt_bool(s.history.neurodegenerative));
    b.add("prior_neuro_illness", from_opt_bool(s.history.prior_neuro_illness));
    b.add("tia_stroke", from_opt_bool(s.history.tia_stroke));
    b.add("anticoagulant", from_opt_bool(s.history.anticoagulant));
    b.add("antiplatelet", from_opt_bool(s.history.antiplatelet));
    blocks[static_cast<size_t>(AspectId::kHistoryDemographics)] = b.finish();
  }
  return blocks;
}

std::vector<AspectId> embedding_aspects(FusionStrategy strategy) {
  std::vector<AspectId> out;
  for (AspectId a : kAspectOrder) {
    bool uses = false;
    switch (strategy) {
      case FusionStrategy::kTabularOnly: uses = false; break;
      case FusionStrategy::kEmbeddingsOnly:
      case FusionStrategy::kNaiveFusion: uses = true; break;
      case FusionStrategy::kModalityAware: uses = modality_aware_uses_embedding(a); break;
    }
    if (uses) out.push_back(a);
  }
  return out;
}

namespace {

void append_block(FeatureVector& out, const FeatureBlock& block) {
  out.names.insert(out.names.end(), block.names.begin(), block.names.end());
  Eigen::Index old = out.values.size();
  out.values.conservativeResize(old + block.values.size());
  out.values.tail(block.values.size()) = block.values;
}

FeatureBlock embedding_block(AspectId aspect, const PooledEmbedding& embedding,
                             const PcaByAspect& pca) {
  const auto& model = pca[static_cast<size_t>(aspect)];
  if (!model) throw DataError("pca not fitted for aspect " + aspect_name(aspect));
  FeatureBlock block;
  block.aspect = aspect;
  block.kind = FeatureKind::kEmbedding;
  block.values = transform_pca(*model, embedding.vector.cast<double>());
  block.names.reserve(static_cast<size_t>(block.values.size()));
  for (Eigen::Index j = 0; j < block.values.size(); ++j) {
    char name[64];
    std::snprintf(name, sizeof(name), "emb.%s.pc%02d", aspect_name(aspect).c_str(),
                  static_cast<int>(j));
    block.names.push_back(name);
  }
  return block;
}

}  // namespace

FeatureVector assemble_features(const Subject& subject, FusionStrategy strategy,
                                const std::array<PooledEmbedding, kAspectCount>& embeddings,
                                const PcaByAspect& pca) {
  auto tabular = encode_tabular(subject);
  FeatureVector out;
  switch (strategy) {
    case FusionStrategy::kTabularOnly:
      for (AspectId a : kAspectOrder) append_block(out, tabular[static_cast<size_t>(a)]);
      break;
    case FusionStrategy::kEmbeddingsOnly:
      for (AspectId a : kAspectOrder)
        append_block(out, embedding_block(a, embeddings[static_cast<size_t>(a)], pca));
      break;
    case FusionStrategy::kNaiveFusion:
      for (AspectId a : kAspectOrder) append_block(out, tabular[static_cast<size_t>(a)]);
      for (AspectId a : kAspectOrder)
        append_block(out, embedding_block(a, embeddings[static_cast<size_t>(a)], pca));
      break;
    case FusionStrategy::kModalityAware:
      for (AspectId a : kAspectOrder) {
        if (modality_aware_uses_embedding(a))
          append_block(out, embedding_block(a, embeddings[static_cast<size_t>(a)], pca));
        else
          append_block(out, tabular[static_cast<size_t>(a)]);
      }
      break;
  }
  return out;
}

FeatureVector assemble_single_aspect(AspectId aspect, const PooledEmbedding& embedding,
                                     const PcaByAspect& pca) {
  FeatureVector out;
  append_block(out, embedding_block(aspect, embedding, pca));
  return out;
}

std::string feature_matrix_to_csv(const std::vector<std::string>& names,
                                  const Eigen::Ref<const Eigen::MatrixXd>& matrix,
                                  const std::vector<std::string>& subject_ids) {
  if (static_cast<Eigen::Index>(subject_ids.size()) != matrix.rows())
    throw DataError("feature export: id count does not match row count");
  if (static_cast<Eigen::Index>(names.size()) != matrix.cols())
    throw DataError("feature export: name count does not match column count");
  std::vector<std::string> header = {"subject_id"};
  header.insert(header.end(), names.begin(), names.end());
  std::string out = render_csv_row(header);
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    std::vector<std::string> row = {subject_ids[static_cast<size_t>(r)]};
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      double v = matrix(r, c);
      row.push_back(is_missing(v) ? std::string() : format_double_roundtrip(v));
    }
    out += render_csv_row(row);
  }
  return out;
}

}  // namespace pterisk
