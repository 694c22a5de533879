#include "pterisk/serializer.hpp"

#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pterisk/errors.hpp"
#include "pterisk/io_util.hpp"

namespace pterisk {

using json = nlohmann::ordered_json;

namespace {

// Durations (days, hours) render with one decimal, lab values and lab times
// with two; trailing fractional zeros are trimmed so values round-trip the
// way they appear in source records.
constexpr int kDurationDecimals = 1;
constexpr int kLabDecimals = 2;

// Qualitative descriptor appended to the worst GCS total.
const std::map<int, std::string> kGcsDescriptors = {{3, "Deep Coma"}};

std::string single_line(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool last_space = false;
  for (char c : text) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
    if (c == ' ' && last_space) continue;
    last_space = (c == ' ');
    out.push_back(c);
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  size_t start = out.find_first_not_of(' ');
  return start == std::string::npos ? std::string() : out.substr(start);
}

std::string opt_int(const std::optional<int>& v) {
  return v ? std::to_string(*v) : std::string(kMissingToken);
}

std::string opt_num(const std::optional<double>& v, int decimals) {
  return v ? format_fixed_trimmed(*v, decimals) : std::string(kMissingToken);
}

std::string gcs_body(const GcsRecord& g) {
  if (!g.total_worst && !g.total_best && !g.eye_worst && !g.eye_best && !g.verbal_worst &&
      !g.verbal_best && !g.motor_worst && !g.motor_best)
    return std::string(kMissingToken) + ".";
  std::string worst = opt_int(g.total_worst);
  if (g.total_worst) {
    auto it = kGcsDescriptors.find(*g.total_worst);
    if (it != kGcsDescriptors.end()) worst += "-" + it->second;
  }
  std::ostringstream out;
  out << "Worst Total " << worst << ", Best " << opt_int(g.total_best) << "."
      << " Components (Worst-Best): Eye " << opt_int(g.eye_worst) << "-" << opt_int(g.eye_best)
      << ", Motor " << opt_int(g.motor_worst) << "-" << opt_int(g.motor_best) << ", Verbal "
      << opt_int(g.verbal_worst) << "-" << opt_int(g.verbal_best) << ".";
  return out.str();
}

std::string course_body(const HospitalCourse& c) {
  std::vector<std::string> sentences;
  if (c.icu_admitted)
    sentences.push_back("ICU stay " + opt_num(c.icu_days, kDurationDecimals) + " days.");
  else
    sentences.push_back("No ICU admission.");
  if (c.surgery_performed) {
    sentences.push_back("Cranial surgery performed (" +
                        c.surgery_type.value_or(kMissingToken) + ").");
    sentences.push_back("Time to surgery " + opt_num(c.hours_to_surgery, kDurationDecimals) +
                        " hours.");
  } else {
    sentences.push_back("No cranial surgery.");
  }
  sentences.push_back(c.acute_seizure_7d ? "Had seizure within 7 days of injury."
                                         : "No seizure within 7 days of injury.");
  if (c.operative_note) sentences.push_back(single_line(*c.operative_note));
  std::string body;
  for (const auto& s : sentences) {
    if (!body.empty()) body.push_back(' ');
    body += s;
  }
  return body;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += item;
  }
  return out;
}

std::string ct_body(const CtFindings& ct) {
  static const std::vector<std::pair<std::string, TriState CtFindings::*>> kFields = {
      {"Contusion", &CtFindings::contusion},
      {"Epidural Hematoma", &CtFindings::epidural_hematoma},
      {"Intracerebral Hemorrhage", &CtFindings::intracerebral_hemorrhage},
      {"Skull Fracture", &CtFindings::skull_fracture},
      {"Subarachnoid Hemorrhage", &CtFindings::subarachnoid_hemorrhage},
  };
  std::vector<std::string> present, absent, indeterminate;
  for (const auto& [name, member] : kFields) {
    switch (ct.*member) {
      case TriState::kPresent: present.push_back(name); break;
      case TriState::kAbsent: absent.push_back(name); break;
      case TriState::kIndeterminate: indeterminate.push_back(name); break;
      case TriState::kNotReported: break;
    }
  }
  std::string body =
      "Findings: " + (present.empty() ? std::string(kMissingToken) : join_list(present)) + ".";
  if (!absent.empty()) body += " Absent: " + join_list(absent) + ".";
  if (!indeterminate.empty()) body += " Indeterminate: " + join_list(indeterminate) + ".";
  if (ct.marshall_score) body += " Marshall CT score " + std::to_string(*ct.marshall_score) + ".";
  return body;
}

std::string imaging_body(const ImagingNotes& img) {
  std::vector<std::string> parts;
  if (img.ct_report) parts.push_back(single_line(*img.ct_report));
  if (img.mri_report) parts.push_back(single_line(*img.mri_report));
  if (parts.empty()) return std::string(kMissingToken) + ".";
  std::string body;
  for (const auto& p : parts) {
    if (!body.empty()) body.push_back(' ');
    body += p;
  }
  return body;
}

std::string labs_body(const LabPanel& labs) {
  // Analyte order follows the rendered exemplar, not the panel layout.
  const std::vector<std::pair<std::string, const std::optional<SeriesSummary>*>> kOrder = {
      {"Creatinine", &labs.creatinine},
      {"Hemoglobin", &labs.hemoglobin},
      {"Lactate", &labs.lactate},
      {"PaCO2", &labs.paco2},
  };
  bool any = false;
  for (const auto& [name, s] : kOrder) any = any || s->has_value();
  if (!any) return std::string(kMissingToken) + ".";

  std::string body;
  for (const auto& [name, s] : kOrder) {
    if (!body.empty()) body.push_back(' ');
    if (!s->has_value()) {
      body += name + " " + kMissingToken + ".";
      continue;
    }
    const SeriesSummary& v = **s;
    body += name + " max value " + format_fixed_trimmed(v.max, kLabDecimals) + " occurred " +
            format_fixed_trimmed(v.time_of_max, kLabDecimals) + " days after injury, last measurement " +
            format_fixed_trimmed(v.last, kLabDecimals) + ", std is " +
            format_fixed_trimmed(v.std, kLabDecimals) + ".";
  }
  return body;
}

std::string history_body(const HistoryDemographics& h) {
  std::string body = std::to_string(h.age_years) + "-year-old " + h.race + " " + h.sex + ".";

  const std::vector<std::pair<std::string, const std::optional<bool>*>> kNeuro = {
      {"epilepsy", &h.prior_epilepsy},
      {"prior seizures", &h.prior_seizures},
      {"neurodegenerative disease", &h.neurodegenerative},
      {"prior neurological illness", &h.prior_neuro_illness},
      {"TIA or stroke", &h.tia_stroke},
  };
  const std::vector<std::pair<std::string, const std::optional<bool>*>> kMeds = {
      {"anticoagulant", &h.anticoagulant},
      {"antiplatelet", &h.antiplatelet},
  };

  std::vector<std::string> neuro_true, med_true;
  bool neuro_unknown = false, med_unknown = false;
  for (const auto& [name, v] : kNeuro) {
    if (!v->has_value())
      neuro_unknown = true;
    else if (**v)
      neuro_true.push_back(name);
  }
  for (const auto& [name, v] : kMeds) {
    if (!v->has_value())
      med_unknown = true;
    else if (**v)
      med_true.push_back(name);
  }

  body += " Medical History:";
  if (neuro_true.empty() && med_true.empty() && !neuro_unknown && !med_unknown)
    return body + " No neurological history or anticoagulant/antiplatelet use.";

  if (!neuro_true.empty())
    body += " History of " + join_list(neuro_true) + ".";
  else if (neuro_unknown)
    body += " Neurological history " + std::string(kMissingToken) + ".";
  else
    body += " No neurological history.";

  if (!med_true.empty()) {
    std::string meds = med_true.size() == 2 ? "Anticoagulant and antiplatelet"
                                            : (med_true[0] == "anticoagulant" ? "Anticoagulant"
                                                                              : "Antiplatelet");
    body += " " + meds + " use.";
  } else if (med_unknown) {
    body += " Anticoagulant/antiplatelet use " + std::string(kMissingToken) + ".";
  } else {
    body += " No anticoagulant/antiplatelet use.";
  }
  return body;
}

}  // namespace

const std::string& aspect_context_tag(AspectId aspect) {
  static const std::array<std::string, kAspectCount> tags = {
      "Neurological Exam (GCS)", "Hospital Course",     "Radiology Report (CT)",
      "Radiology Report (Brain)", "Laboratory results", "Patient Demographics",
  };
  return tags[static_cast<size_t>(aspect)];
}

AspectParagraph serialize_aspect(const Subject& subject, AspectId aspect) {
  std::string body;
  switch (aspect) {
    case AspectId::kGcs: body = gcs_body(subject.gcs); break;
    case AspectId::kHospitalCourse: body = course_body(subject.course); break;
    case AspectId::kCtFindings: body = ct_body(subject.ct); break;
    case AspectId::kImagingNotes: body = imaging_body(subject.imaging); break;
    case AspectId::kLabs: body = labs_body(subject.labs); break;
    case AspectId::kHistoryDemographics: body = history_body(subject.history); break;
  }
  AspectParagraph p;
  p.aspect = aspect;
  p.context_tag = aspect_context_tag(aspect);
  p.text = p.context_tag + ": " + body;
  return p;
}

std::array<AspectParagraph, kAspectCount> serialize_all(const Subject& subject) {
  std::array<AspectParagraph, kAspectCount> out;
  for (size_t i = 0; i < kAspectCount; ++i) out[i] = serialize_aspect(subject, kAspectOrder[i]);
  return out;
}

AspectParagraph concatenate_paragraphs(const std::vector<AspectParagraph>& paragraphs) {
  if (paragraphs.size() != kAspectCount)
    throw DataError("expected " + std::to_string(kAspectCount) + " paragraphs, got " +
                    std::to_string(paragraphs.size()));
  std::array<const AspectParagraph*, kAspectCount> by_aspect{};
  for (const auto& p : paragraphs) {
    auto idx = static_cast<size_t>(p.aspect);
    if (by_aspect[idx]) throw DataError("duplicate aspect paragraph: " + aspect_name(p.aspect));
    by_aspect[idx] = &p;
  }
  AspectParagraph out;
  out.aspect = AspectId::kGcs;  // carrier; combined text spans all aspects
  out.context_tag = "Combined Clinical Record";
  out.text = out.context_tag + ": ";
  for (size_t i = 0; i < kAspectCount; ++i) {
    if (i) out.text.push_back(' ');
    out.text += by_aspect[i]->text;
  }
  return out;
}

std::string paragraphs_to_jsonl(const std::vector<ParagraphRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json j;
    j["subject_id"] = r.subject_id;
    j["aspect"] = aspect_name(r.paragraph.aspect);
    j["context_tag"] = r.paragraph.context_tag;
    j["text"] = r.paragraph.text;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<ParagraphRecord> paragraphs_from_jsonl(const std::string& content) {
  std::vector<ParagraphRecord> records;
  std::istringstream in(content);
  std::string line;
  size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      ParagraphRecord r;
      r.subject_id = j.at("subject_id").get<std::string>();
      r.paragraph.aspect = aspect_from_name(j.at("aspect").get<std::string>());
      r.paragraph.context_tag = j.at("context_tag").get<std::string>();
      r.paragraph.text = j.at("text").get<std::string>();
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError("paragraph record " + std::to_string(row) + ": " + e.what());
    }
  }
  return records;
}

void save_paragraphs(const std::vector<ParagraphRecord>& records,
                     const std::filesystem::path& path) {
  atomic_write_file(path, paragraphs_to_jsonl(records));
}

std::vector<ParagraphRecord> load_paragraphs(const std::filesystem::path& path) {
  return paragraphs_from_jsonl(read_file(path));
}

}  // namespace pterisk
