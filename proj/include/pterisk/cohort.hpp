#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pterisk {

// The six clinical aspects, in the fixed order used everywhere downstream.
enum class AspectId {
  kGcs = 0,
  kHospitalCourse,
  kCtFindings,
  kImagingNotes,
  kLabs,
  kHistoryDemographics,
};

inline constexpr int kAspectCount = 6;

inline constexpr std::array<AspectId, kAspectCount> kAspectOrder = {
    AspectId::kGcs,          AspectId::kHospitalCourse, AspectId::kCtFindings,
    AspectId::kImagingNotes, AspectId::kLabs,           AspectId::kHistoryDemographics,
};

const std::string& aspect_name(AspectId aspect);
AspectId aspect_from_name(const std::string& name);

enum class TriState { kPresent, kAbsent, kIndeterminate, kNotReported };

const std::string& tristate_name(TriState v);
TriState tristate_from_name(const std::string& name);

// Repeated-measure summary for one analyte.
struct SeriesSummary {
  double first = 0.0;
  double last = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population convention
  double time_of_max = 0.0;

  bool operator==(const SeriesSummary&) const = default;
};

struct GcsRecord {
  std::optional<int> total_worst;  // 3-15
  std::optional<int> total_best;
  std::optional<int> eye_worst;  // 1-4
  std::optional<int> eye_best;
  std::optional<int> verbal_worst;  // 1-5
  std::optional<int> verbal_best;
  std::optional<int> motor_worst;  // 1-6
  std::optional<int> motor_best;

  bool operator==(const GcsRecord&) const = default;
};

struct HospitalCourse {
  bool icu_admitted = false;
  std::optional<double> icu_days;
  bool surgery_performed = false;
  std::optional<std::string> surgery_type;
  std::optional<double> hours_to_surgery;
  bool acute_seizure_7d = false;
  std::optional<std::string> operative_note;

  bool operator==(const HospitalCourse&) const = default;
};

struct CtFindings {
  TriState contusion = TriState::kNotReported;
  TriState epidural_hematoma = TriState::kNotReported;
  TriState intracerebral_hemorrhage = TriState::kNotReported;
  TriState skull_fracture = TriState::kNotReported;
  TriState subarachnoid_hemorrhage = TriState::kNotReported;
  std::optional<int> marshall_score;  // 1-6

  bool operator==(const CtFindings&) const = default;
};

struct LabPanel {
  std::optional<SeriesSummary> creatinine;
  std::optional<SeriesSummary> lactate;
  std::optional<SeriesSummary> hemoglobin;
  std::optional<SeriesSummary> paco2;

  bool operator==(const LabPanel&) const = default;
};

struct HistoryDemographics {
  int age_years = 0;
  std::string sex;   // lowercase, e.g. "female"
  std::string race;  // e.g. "White"
  std::optional<bool> prior_epilepsy;
  std::optional<bool> prior_seizures;
  std::optional<bool> neurodegenerative;
  std::optional<bool> prior_neuro_illness;
  std::optional<bool> tia_stroke;
  std::optional<bool> anticoagulant;
  std::optional<bool> antiplatelet;

  bool operator==(const HistoryDemographics&) const = default;
};

struct ImagingNotes {
  std::optional<std::string> ct_report;
  std::optional<std::string> mri_report;

  bool operator==(const ImagingNotes&) const = default;
};

struct Subject {
  std::string subject_id;
  GcsRecord gcs;
  HospitalCourse course;
  CtFindings ct;
  LabPanel labs;
  HistoryDemographics history;
  ImagingNotes imaging;
  bool label = false;  // true = PTE

  bool operator==(const Subject&) const = default;
};

enum class Provenance { kIngested, kSynthetic };

struct Cohort {
  std::vector<Subject> subjects;
  Provenance provenance = Provenance::kIngested;
  std::optional<uint64_t> generator_seed;
};

// A subject as it sits in the source data, before inclusion filtering:
// carries the raw PTE diagnosis field instead of a resolved label.
struct RawSubject {
  Subject subject;
  TriState pte_outcome = TriState::kNotReported;
};

struct RawCohort {
  std::vector<RawSubject> subjects;
  Provenance provenance = Provenance::kIngested;
};

// --- operations ---------------------------------------------------------

struct Measurement {
  double time_days = 0.0;
  double value = 0.0;
};

// Summaries over the series ordered by ascending time; equal timestamps keep
// input order. time_of_max is the time of the first occurrence of the
// maximum. std is the population standard deviation.
SeriesSummary aggregate_series(const std::vector<Measurement>& measurements);

// Retains subjects with a definite prior_epilepsy = false and a definite PTE
// outcome; ordering preserved. Idempotent by construction.
Cohort apply_inclusion(const RawCohort& raw);

// Throws DataError naming the violated invariant.
void validate_subject(const Subject& subject);
void validate_cohort(const Cohort& cohort, bool require_both_classes);

}  // namespace pterisk
