#pragma once

#include <cstdint>

#include "pterisk/cohort.hpp"

namespace pterisk {

// Shape-matched stand-in for the restricted clinical cohort. Outcomes come
// from a documented logistic risk model over acute seizure, injury severity
// (worst GCS), cranial surgery, and ICU stay; free-text notes draw from
// keyword pools tied to the same latent severity so text encoders can
// recover the signal. Coefficients are frozen here and overridable through
// config for sensitivity runs.
struct SynthParams {
  uint64_t seed = 7;
  int n = 256;
  double prevalence = 58.0 / 256.0;

  // Logistic risk model: risk = w_seizure*seizure + w_gcs*(15 - worst_total)/12
  //                             + w_surgery*surgery + w_icu*min(icu_days,30)/30
  //                             + noise_scale*logistic_noise.
  // Positive labels are the top round(prevalence*n) risks.
  double w_seizure = 2.6;
  double w_gcs = 2.2;
  double w_surgery = 1.2;
  double w_icu = 1.2;
  double noise_scale = 0.7;

  // Fraction of optional fields masked to NOT_REPORTED.
  double mask_fraction = 0.06;
  // Fraction of subjects with imaging notes available.
  double imaging_availability = 0.41;

  // When set, structured variables are drawn independently of outcome and the
  // label signal lives only in the free-text notes (which are then always
  // available). Used for representation comparisons.
  bool text_only_signal = false;
};

Cohort generate_synthetic_cohort(const SynthParams& params);

}  // namespace pterisk
