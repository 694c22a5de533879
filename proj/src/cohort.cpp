#include "pterisk/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "pterisk/errors.hpp"

namespace pterisk {

const std::string& aspect_name(AspectId aspect) {
  static const std::array<std::string, kAspectCount> names = {
      "gcs", "hospital_course", "ct_findings", "imaging_notes", "labs", "history_demographics"};
  return names[static_cast<size_t>(aspect)];
}

AspectId aspect_from_name(const std::string& name) {
  for (AspectId a : kAspectOrder)
    if (aspect_name(a) == name) return a;
  throw DataError("unknown aspect: " + name);
}

const std::string& tristate_name(TriState v) {
  static const std::array<std::string, 4> names = {"present", "absent", "indeterminate",
                                                   "NOT_REPORTED"};
  return names[static_cast<size_t>(v)];
}

TriState tristate_from_name(const std::string& name) {
  std::string lower;
  lower.reserve(name.size());
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "present" || lower == "yes" || lower == "true" || lower == "1")
    return TriState::kPresent;
  if (lower == "absent" || lower == "no" || lower == "false" || lower == "0")
    return TriState::kAbsent;
  if (lower == "indeterminate") return TriState::kIndeterminate;
  if (lower == "not_reported" || lower.empty()) return TriState::kNotReported;
  throw DataError("unknown tri-state value: " + name);
}

SeriesSummary aggregate_series(const std::vector<Measurement>& measurements) {
  if (measurements.empty()) throw DataError("empty series");
  for (const auto& m : measurements)
    if (!std::isfinite(m.time_days) || !std::isfinite(m.value))
      throw DataError("invalid measurement");

  std::vector<size_t> order(measurements.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return measurements[a].time_days < measurements[b].time_days;
  });

  SeriesSummary s;
  s.first = measurements[order.front()].value;
  s.last = measurements[order.back()].value;
  s.min = s.first;
  s.max = s.first;
  s.time_of_max = measurements[order.front()].time_days;
  double sum = 0.0;
  for (size_t idx : order) {
    double v = measurements[idx].value;
    s.min = std::min(s.min, v);
    if (v > s.max) {
      s.max = v;
      s.time_of_max = measurements[idx].time_days;
    }
    sum += v;
  }
  const double n = static_cast<double>(measurements.size());
  s.mean = sum / n;
  double sq = 0.0;
  for (size_t idx : order) {
    double d = measurements[idx].value - s.mean;
    sq += d * d;
  }
  s.std = std::sqrt(sq / n);
  return s;
}

Cohort apply_inclusion(const RawCohort& raw) {
  Cohort out;
  out.provenance = raw.provenance;
  for (const RawSubject& rs : raw.subjects) {
    const auto& prior = rs.subject.history.prior_epilepsy;
    if (!prior.has_value() || *prior) continue;
    if (rs.pte_outcome != TriState::kPresent && rs.pte_outcome != TriState::kAbsent) continue;
    Subject s = rs.subject;
    s.label = (rs.pte_outcome == TriState::kPresent);
    out.subjects.push_back(std::move(s));
  }
  return out;
}

namespace {

void check_series(const std::string& id, const std::string& analyte, const SeriesSummary& s) {
  auto fail = [&](const std::string& what) {
    throw DataError("subject " + id + ": " + analyte + " series " + what);
  };
  if (s.std < 0.0) fail("has negative std");
  if (!(s.min <= s.mean && s.mean <= s.max)) fail("violates min <= mean <= max");
  if (!(s.min <= s.first && s.first <= s.max)) fail("violates min <= first <= max");
  if (!(s.min <= s.last && s.last <= s.max)) fail("violates min <= last <= max");
  if (s.time_of_max < 0.0) fail("has negative time_of_max");
}

void check_pair(const std::string& id, const char* name, const std::optional<int>& worst,
                const std::optional<int>& best, int lo, int hi) {
  auto in_range = [&](int v) { return v >= lo && v <= hi; };
  if (worst && !in_range(*worst))
    throw DataError("subject " + id + ": gcs " + name + " worst out of range");
  if (best && !in_range(*best))
    throw DataError("subject " + id + ": gcs " + name + " best out of range");
  if (worst && best && *worst > *best)
    throw DataError("subject " + id + ": gcs " + name + " worst > best");
}

}  // namespace

void validate_subject(const Subject& s) {
  const std::string& id = s.subject_id.empty() ? std::string("<unnamed>") : s.subject_id;
  check_pair(id, "total", s.gcs.total_worst, s.gcs.total_best, 3, 15);
  check_pair(id, "eye", s.gcs.eye_worst, s.gcs.eye_best, 1, 4);
  check_pair(id, "verbal", s.gcs.verbal_worst, s.gcs.verbal_best, 1, 5);
  check_pair(id, "motor", s.gcs.motor_worst, s.gcs.motor_best, 1, 6);

  if (s.course.icu_days && !s.course.icu_admitted)
    throw DataError("subject " + id + ": icu_days present without icu_admitted");
  if (s.course.icu_days && *s.course.icu_days < 0.0)
    throw DataError("subject " + id + ": negative icu_days");
  if ((s.course.hours_to_surgery || s.course.surgery_type) && !s.course.surgery_performed)
    throw DataError("subject " + id + ": surgery details present without surgery_performed");
  if (s.course.hours_to_surgery && *s.course.hours_to_surgery < 0.0)
    throw DataError("subject " + id + ": negative hours_to_surgery");

  if (s.ct.marshall_score && (*s.ct.marshall_score < 1 || *s.ct.marshall_score > 6))
    throw DataError("subject " + id + ": marshall_score out of range");

  if (s.labs.creatinine) check_series(id, "creatinine", *s.labs.creatinine);
  if (s.labs.lactate) check_series(id, "lactate", *s.labs.lactate);
  if (s.labs.hemoglobin) check_series(id, "hemoglobin", *s.labs.hemoglobin);
  if (s.labs.paco2) check_series(id, "paco2", *s.labs.paco2);

  if (s.history.age_years < 0) throw DataError("subject " + id + ": negative age");
}

void validate_cohort(const Cohort& cohort, bool require_both_classes) {
  if (cohort.subjects.empty()) throw DataError("cohort is empty");
  std::unordered_set<std::string> ids;
  size_t positives = 0;
  for (const Subject& s : cohort.subjects) {
    if (!ids.insert(s.subject_id).second) throw DataError("duplicate subject: " + s.subject_id);
    validate_subject(s);
    if (s.label) ++positives;
  }
  if (require_both_classes && (positives == 0 || positives == cohort.subjects.size()))
    throw DataError("cohort must contain both classes for training");
}

}  // namespace pterisk
