#include "pterisk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pterisk/errors.hpp"
#include "pterisk/rng.hpp"

namespace pterisk {

namespace {

double round_to(double v, int decimals) {
  double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

double logistic_cdf(double z) { return 1.0 / (1.0 + std::exp(-z)); }

const std::vector<std::string> kSexes = {"male", "female"};
const std::vector<double> kSexWeights = {0.68, 0.32};
const std::vector<std::string> kRaces = {"White", "Black", "Asian", "Hispanic", "Other"};
const std::vector<double> kRaceWeights = {0.58, 0.16, 0.07, 0.13, 0.06};

const std::vector<std::string> kSevereSurgeryTypes = {
    "Decompressive craniectomy",
    "Craniotomy with evacuation of subdural hematoma",
    "Craniotomy with evacuation of epidural hematoma",
};
const std::vector<std::string> kMinorSurgeryTypes = {
    "Burr hole drainage",
    "ICP monitor placement",
    "Elevation of depressed skull fracture",
};

const std::vector<std::string> kSevereOperativeSentences = {
    "Emergent decompressive craniectomy with evacuation of acute subdural hematoma.",
    "Significant midline shift noted intraoperatively.",
    "Refractory intracranial hypertension requiring removal of the bone flap.",
    "Extensive contusion debridement performed with hemostasis difficult to achieve.",
    "Dural laceration repaired after evacuation of hemorrhagic clot.",
    "Swollen herniating cortex observed upon opening the dura.",
};
const std::vector<std::string> kMinorOperativeSentences = {
    "Burr hole placement for intracranial pressure monitor.",
    "Elevation of depressed skull fracture without dural violation.",
    "Uncomplicated procedure with minimal blood loss.",
    "Stable neurological examination following closure.",
    "Routine wound closure and extubation in the operating room.",
    "Small extra-axial collection drained without incident.",
};

const std::vector<std::string> kSevereImagingSentences = {
    "Multiple foci of susceptibility artifact consistent with diffuse axonal injury.",
    "Large frontal contusion with surrounding edema and mass effect.",
    "Acute subdural hematoma along the convexity with midline shift.",
    "Effacement of the basal cisterns concerning for elevated intracranial pressure.",
    "Hemorrhagic shear injury at the gray-white junction.",
    "Interval worsening of intraparenchymal hemorrhage.",
};
const std::vector<std::string> kMinorImagingSentences = {
    "No acute intracranial abnormality identified.",
    "Small focal contusion without mass effect.",
    "Stable appearance compared with the prior examination.",
    "No evidence of new hemorrhage or infarction.",
    "Ventricles and sulci within normal limits for age.",
    "Postsurgical changes without acute complication.",
};

std::string pick_weighted(Rng& rng, const std::vector<std::string>& values,
                          const std::vector<double>& weights) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform01() * total;
  for (size_t i = 0; i < values.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return values[i];
  }
  return values.back();
}

// Sentences draw from the severe pool with sharply severity-dependent odds,
// so note wording tracks the latent that also drives the structured record.
std::string compose_note(Rng& rng, double latent, double sharpness,
                         const std::vector<std::string>& severe,
                         const std::vector<std::string>& minor, int min_sentences,
                         int max_sentences) {
  int count = min_sentences + static_cast<int>(rng.below(
                                  static_cast<uint64_t>(max_sentences - min_sentences + 1)));
  double severe_prob = logistic_cdf(sharpness * latent);
  std::string note;
  for (int i = 0; i < count; ++i) {
    const auto& pool = rng.bernoulli(severe_prob) ? severe : minor;
    if (!note.empty()) note.push_back(' ');
    note += rng.pick(pool);
  }
  return note;
}

SeriesSummary make_series(Rng& rng, double base, double severity_shift, double spread,
                          double floor_value) {
  int count = 3 + static_cast<int>(rng.below(7));
  std::vector<Measurement> ms;
  std::vector<double> times;
  times.reserve(count);
  for (int i = 0; i < count; ++i) times.push_back(round_to(rng.uniform(0.0, 7.0), 2));
  std::sort(times.begin(), times.end());
  for (int i = 0; i < count; ++i) {
    double v = base + severity_shift + spread * rng.normal();
    ms.push_back({times[static_cast<size_t>(i)], round_to(std::max(floor_value, v), 2)});
  }
  return aggregate_series(ms);
}

struct DrawnSubject {
  Subject subject;
  double risk = 0.0;
};

}  // namespace

Cohort generate_synthetic_cohort(const SynthParams& p) {
  if (p.prevalence <= 0.0 || p.prevalence >= 1.0)
    throw ConfigError("prevalence must lie strictly inside (0, 1)");
  if (p.n < 20) throw ConfigError("synthetic cohort needs n >= 20");
  const int positives = static_cast<int>(std::llround(p.prevalence * p.n));
  if (positives < 5) throw ConfigError("prevalence * n must be at least 5");

  Rng rng(p.seed);
  std::vector<DrawnSubject> drawn;
  drawn.reserve(static_cast<size_t>(p.n));

  for (int i = 0; i < p.n; ++i) {
    DrawnSubject d;
    Subject& s = d.subject;
    char id[16];
    std::snprintf(id, sizeof(id), "S%04d", i + 1);
    s.subject_id = id;

    // Latent severity drives every clinical variable; the risk model reads
    // the realized variables, not the latent directly.
    double latent = std::clamp(rng.normal(), -3.0, 3.0);
    // In text-only mode the structured record is drawn from an independent
    // latent so tabular features carry no outcome signal.
    double text_latent = latent;
    if (p.text_only_signal) latent = std::clamp(rng.normal(), -3.0, 3.0);
    double sev01 = (latent + 3.0) / 6.0;

    s.history.age_years = 18 + static_cast<int>(rng.below(73));
    s.history.sex = pick_weighted(rng, kSexes, kSexWeights);
    s.history.race = pick_weighted(rng, kRaces, kRaceWeights);
    s.history.prior_epilepsy = false;
    s.history.prior_seizures = rng.bernoulli(0.03);
    s.history.neurodegenerative = rng.bernoulli(0.03);
    s.history.prior_neuro_illness = rng.bernoulli(0.08);
    s.history.tia_stroke = rng.bernoulli(0.05);
    s.history.anticoagulant = rng.bernoulli(0.07);
    s.history.antiplatelet = rng.bernoulli(0.09);

    // GCS components; totals stay consistent with the parts.
    auto component = [&](int lo, int hi) {
      double span = static_cast<double>(hi - lo);
      double v = hi - span * sev01 + 0.8 * rng.normal();
      return std::clamp(static_cast<int>(std::lround(v)), lo, hi);
    };
    int eye_w = component(1, 4);
    int verbal_w = component(1, 5);
    int motor_w = component(1, 6);
    auto recover = [&](int worst, int hi) {
      int gain = static_cast<int>(rng.below(3));
      return std::clamp(worst + gain, worst, hi);
    };
    int eye_b = recover(eye_w, 4);
    int verbal_b = recover(verbal_w, 5);
    int motor_b = recover(motor_w, 6);
    s.gcs.eye_worst = eye_w;
    s.gcs.eye_best = eye_b;
    s.gcs.verbal_worst = verbal_w;
    s.gcs.verbal_best = verbal_b;
    s.gcs.motor_worst = motor_w;
    s.gcs.motor_best = motor_b;
    s.gcs.total_worst = eye_w + verbal_w + motor_w;
    s.gcs.total_best = eye_b + verbal_b + motor_b;

    s.course.icu_admitted = rng.bernoulli(logistic_cdf(-0.4 + 2.2 * latent));
    if (s.course.icu_admitted) {
      double days = std::exp(1.0 + 0.8 * latent + 0.45 * rng.normal());
      s.course.icu_days = round_to(std::clamp(days, 0.2, 45.0), 1);
    }
    s.course.surgery_performed = rng.bernoulli(logistic_cdf(-1.2 + 1.8 * latent));
    if (s.course.surgery_performed) {
      s.course.surgery_type =
          rng.bernoulli(sev01) ? rng.pick(kSevereSurgeryTypes) : rng.pick(kMinorSurgeryTypes);
      double hours = std::exp(2.4 - 0.5 * latent + 0.5 * rng.normal());
      s.course.hours_to_surgery = round_to(std::clamp(hours, 0.5, 96.0), 1);
      double note_latent = p.text_only_signal ? text_latent : latent;
      s.course.operative_note = compose_note(rng, note_latent, 1.8, kSevereOperativeSentences,
                                             kMinorOperativeSentences, 3, 5);
    }
    s.course.acute_seizure_7d = rng.bernoulli(logistic_cdf(-1.6 + 2.0 * latent));

    auto finding = [&](double base) {
      return rng.bernoulli(logistic_cdf(base + 1.2 * latent)) ? TriState::kPresent
                                                              : TriState::kAbsent;
    };
    s.ct.contusion = finding(-0.3);
    s.ct.epidural_hematoma = finding(-1.6);
    s.ct.intracerebral_hemorrhage = finding(-1.1);
    s.ct.skull_fracture = finding(-0.8);
    s.ct.subarachnoid_hemorrhage = finding(-0.5);
    s.ct.marshall_score =
        std::clamp(static_cast<int>(std::lround(1.0 + 3.2 * sev01 + 0.8 * rng.normal())), 1, 6);

    s.labs.creatinine = make_series(rng, 1.0, 0.15 * latent, 0.25, 0.2);
    s.labs.lactate = make_series(rng, 1.8, 0.7 * latent, 0.5, 0.0);
    s.labs.hemoglobin = make_series(rng, 12.5, -0.9 * latent, 1.1, 4.0);
    s.labs.paco2 = make_series(rng, 40.0, 1.5 * latent, 3.0, 15.0);

    bool imaging_available =
        p.text_only_signal ? true : rng.bernoulli(p.imaging_availability);
    if (imaging_available) {
      double note_latent = p.text_only_signal ? text_latent : latent;
      s.imaging.ct_report = compose_note(rng, note_latent, 2.4, kSevereImagingSentences,
                                         kMinorImagingSentences, 4, 6);
      if (rng.bernoulli(0.5))
        s.imaging.mri_report = compose_note(rng, note_latent, 2.4, kSevereImagingSentences,
                                            kMinorImagingSentences, 2, 4);
    }

    // Risk model over realized variables (pre-masking).
    double gcs_severity = (15.0 - *s.gcs.total_worst) / 12.0;
    double icu_norm = s.course.icu_days ? std::min(*s.course.icu_days, 30.0) / 30.0 : 0.0;
    if (p.text_only_signal) {
      d.risk = 2.5 * text_latent + p.noise_scale * rng.logistic();
    } else {
      d.risk = p.w_seizure * (s.course.acute_seizure_7d ? 1.0 : 0.0) +
               p.w_gcs * gcs_severity +
               p.w_surgery * (s.course.surgery_performed ? 1.0 : 0.0) + p.w_icu * icu_norm +
               p.noise_scale * rng.logistic();
    }

    // Reporting artifacts: mask a fraction of the optional record.
    auto mask = [&]() { return rng.bernoulli(p.mask_fraction); };
    auto mask_tristate = [&](TriState& t) {
      if (mask()) t = TriState::kNotReported;
    };
    mask_tristate(s.ct.contusion);
    mask_tristate(s.ct.epidural_hematoma);
    mask_tristate(s.ct.intracerebral_hemorrhage);
    mask_tristate(s.ct.skull_fracture);
    mask_tristate(s.ct.subarachnoid_hemorrhage);
    if (mask()) s.ct.marshall_score.reset();
    if (mask()) {
      s.gcs.eye_worst.reset();
      s.gcs.eye_best.reset();
    }
    if (mask()) {
      s.gcs.verbal_worst.reset();
      s.gcs.verbal_best.reset();
    }
    if (mask()) {
      s.gcs.motor_worst.reset();
      s.gcs.motor_best.reset();
    }
    if (mask()) s.labs.creatinine.reset();
    if (mask()) s.labs.lactate.reset();
    if (mask()) s.labs.paco2.reset();
    if (mask()) s.course.icu_days.reset();
    if (mask()) s.course.hours_to_surgery.reset();
    if (mask()) s.history.tia_stroke.reset();
    if (mask()) s.history.anticoagulant.reset();
    if (mask()) s.history.antiplatelet.reset();

    drawn.push_back(std::move(d));
  }

  // Exactly round(prevalence * n) positives: highest risks, index-stable.
  std::vector<size_t> order(drawn.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return drawn[a].risk > drawn[b].risk; });
  for (int r = 0; r < positives; ++r) drawn[order[static_cast<size_t>(r)]].subject.label = true;

  Cohort cohort;
  cohort.provenance = Provenance::kSynthetic;
  cohort.generator_seed = p.seed;
  cohort.subjects.reserve(drawn.size());
  for (auto& d : drawn) cohort.subjects.push_back(std::move(d.subject));
  return cohort;
}

}  // namespace pterisk
