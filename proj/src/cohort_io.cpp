#include "pterisk/cohort_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "pterisk/errors.hpp"
#include "pterisk/io_util.hpp"

namespace pterisk {

using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kAnalytes = {"creatinine", "lactate", "hemoglobin", "paco2"};
const std::vector<std::string> kSummaryFields = {"first", "last",  "min",        "max",
                                                 "mean",  "std", "time_of_max"};

std::vector<std::string> csv_columns() {
  std::vector<std::string> cols = {
      "subject_id",       "pte_outcome",
      "gcs_total_worst",  "gcs_total_best",
      "gcs_eye_worst",    "gcs_eye_best",
      "gcs_verbal_worst", "gcs_verbal_best",
      "gcs_motor_worst",  "gcs_motor_best",
      "icu_admitted",     "icu_days",
      "surgery_performed","surgery_type",
      "hours_to_surgery", "acute_seizure_7d",
      "operative_note",
      "ct_contusion",     "ct_epidural_hematoma",
      "ct_intracerebral_hemorrhage",
      "ct_skull_fracture","ct_subarachnoid_hemorrhage",
      "marshall_score",
      "ct_report",        "mri_report",
      "age_years",        "sex",
      "race",             "prior_epilepsy",
      "prior_seizures",   "neurodegenerative",
      "prior_neuro_illness", "tia_stroke",
      "anticoagulant",    "antiplatelet",
  };
  for (const auto& a : kAnalytes)
    for (const auto& f : kSummaryFields) cols.push_back(a + "_" + f);
  return cols;
}

bool is_missing_cell(const std::string& cell) {
  return cell.empty() || cell == "NOT_REPORTED";
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct CellContext {
  size_t row;  // 1-based data row
  const std::string* column;
};

[[noreturn]] void cell_error(const CellContext& ctx, const std::string& what) {
  throw DataError("row " + std::to_string(ctx.row) + ", column '" + *ctx.column + "': " + what);
}

std::optional<bool> parse_opt_bool(const std::string& cell, const CellContext& ctx) {
  if (is_missing_cell(cell)) return std::nullopt;
  std::string v = lower(cell);
  if (v == "yes" || v == "true" || v == "1") return true;
  if (v == "no" || v == "false" || v == "0") return false;
  cell_error(ctx, "expected boolean, got '" + cell + "'");
}

std::optional<int> parse_opt_int(const std::string& cell, const CellContext& ctx) {
  if (is_missing_cell(cell)) return std::nullopt;
  try {
    size_t pos = 0;
    int v = std::stoi(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    cell_error(ctx, "expected integer, got '" + cell + "'");
  }
}

std::optional<double> parse_opt_double(const std::string& cell, const CellContext& ctx) {
  if (is_missing_cell(cell)) return std::nullopt;
  try {
    size_t pos = 0;
    double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument("trailing");
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
    return v;
  } catch (const std::exception&) {
    cell_error(ctx, "expected number, got '" + cell + "'");
  }
}

std::optional<std::string> parse_opt_text(const std::string& cell) {
  if (is_missing_cell(cell)) return std::nullopt;
  return cell;
}

std::string bool_cell(bool v) { return v ? "yes" : "no"; }
std::string opt_bool_cell(const std::optional<bool>& v) {
  return v ? bool_cell(*v) : std::string();
}
std::string opt_int_cell(const std::optional<int>& v) {
  return v ? std::to_string(*v) : std::string();
}
std::string opt_double_cell(const std::optional<double>& v) {
  return v ? format_double_roundtrip(*v) : std::string();
}
std::string opt_text_cell(const std::optional<std::string>& v) { return v.value_or(""); }

void summary_cells(const std::optional<SeriesSummary>& s, std::vector<std::string>& out) {
  if (!s) {
    for (size_t i = 0; i < kSummaryFields.size(); ++i) out.emplace_back();
    return;
  }
  out.push_back(format_double_roundtrip(s->first));
  out.push_back(format_double_roundtrip(s->last));
  out.push_back(format_double_roundtrip(s->min));
  out.push_back(format_double_roundtrip(s->max));
  out.push_back(format_double_roundtrip(s->mean));
  out.push_back(format_double_roundtrip(s->std));
  out.push_back(format_double_roundtrip(s->time_of_max));
}

std::optional<SeriesSummary> summary_from_cells(
    const std::unordered_map<std::string, std::string>& cells, const std::string& analyte,
    size_t row) {
  std::array<std::optional<double>, 7> vals;
  bool any = false;
  for (size_t i = 0; i < kSummaryFields.size(); ++i) {
    std::string col = analyte + "_" + kSummaryFields[i];
    auto it = cells.find(col);
    if (it == cells.end()) continue;
    CellContext ctx{row, &col};
    vals[i] = parse_opt_double(it->second, ctx);
    any = any || vals[i].has_value();
  }
  if (!any) return std::nullopt;
  for (size_t i = 0; i < kSummaryFields.size(); ++i) {
    if (!vals[i]) {
      std::string col = analyte + "_" + kSummaryFields[i];
      throw DataError("row " + std::to_string(row) + ", column '" + col +
                      "': partial lab summary (all seven fields required when any is set)");
    }
  }
  SeriesSummary s;
  s.first = *vals[0];
  s.last = *vals[1];
  s.min = *vals[2];
  s.max = *vals[3];
  s.mean = *vals[4];
  s.std = *vals[5];
  s.time_of_max = *vals[6];
  return s;
}

RawSubject subject_from_cells(const std::unordered_map<std::string, std::string>& cells,
                              size_t row) {
  auto cell = [&](const char* name) -> const std::string& {
    static const std::string empty;
    auto it = cells.find(name);
    return it == cells.end() ? empty : it->second;
  };
  auto ctx = [&](const char* name) {
    static thread_local std::string col;
    col = name;
    return CellContext{row, &col};
  };

  RawSubject rs;
  Subject& s = rs.subject;
  s.subject_id = cell("subject_id");
  if (s.subject_id.empty())
    throw DataError("row " + std::to_string(row) + ", column 'subject_id': missing id");
  rs.pte_outcome = tristate_from_name(cell("pte_outcome"));

  s.gcs.total_worst = parse_opt_int(cell("gcs_total_worst"), ctx("gcs_total_worst"));
  s.gcs.total_best = parse_opt_int(cell("gcs_total_best"), ctx("gcs_total_best"));
  s.gcs.eye_worst = parse_opt_int(cell("gcs_eye_worst"), ctx("gcs_eye_worst"));
  s.gcs.eye_best = parse_opt_int(cell("gcs_eye_best"), ctx("gcs_eye_best"));
  s.gcs.verbal_worst = parse_opt_int(cell("gcs_verbal_worst"), ctx("gcs_verbal_worst"));
  s.gcs.verbal_best = parse_opt_int(cell("gcs_verbal_best"), ctx("gcs_verbal_best"));
  s.gcs.motor_worst = parse_opt_int(cell("gcs_motor_worst"), ctx("gcs_motor_worst"));
  s.gcs.motor_best = parse_opt_int(cell("gcs_motor_best"), ctx("gcs_motor_best"));

  s.course.icu_admitted = parse_opt_bool(cell("icu_admitted"), ctx("icu_admitted")).value_or(false);
  s.course.icu_days = parse_opt_double(cell("icu_days"), ctx("icu_days"));
  s.course.surgery_performed =
      parse_opt_bool(cell("surgery_performed"), ctx("surgery_performed")).value_or(false);
  s.course.surgery_type = parse_opt_text(cell("surgery_type"));
  s.course.hours_to_surgery = parse_opt_double(cell("hours_to_surgery"), ctx("hours_to_surgery"));
  s.course.acute_seizure_7d =
      parse_opt_bool(cell("acute_seizure_7d"), ctx("acute_seizure_7d")).value_or(false);
  s.course.operative_note = parse_opt_text(cell("operative_note"));

  s.ct.contusion = tristate_from_name(cell("ct_contusion"));
  s.ct.epidural_hematoma = tristate_from_name(cell("ct_epidural_hematoma"));
  s.ct.intracerebral_hemorrhage = tristate_from_name(cell("ct_intracerebral_hemorrhage"));
  s.ct.skull_fracture = tristate_from_name(cell("ct_skull_fracture"));
  s.ct.subarachnoid_hemorrhage = tristate_from_name(cell("ct_subarachnoid_hemorrhage"));
  s.ct.marshall_score = parse_opt_int(cell("marshall_score"), ctx("marshall_score"));

  s.imaging.ct_report = parse_opt_text(cell("ct_report"));
  s.imaging.mri_report = parse_opt_text(cell("mri_report"));

  s.history.age_years = parse_opt_int(cell("age_years"), ctx("age_years")).value_or(0);
  s.history.sex = lower(cell("sex"));
  s.history.race = cell("race");
  s.history.prior_epilepsy = parse_opt_bool(cell("prior_epilepsy"), ctx("prior_epilepsy"));
  s.history.prior_seizures = parse_opt_bool(cell("prior_seizures"), ctx("prior_seizures"));
  s.history.neurodegenerative =
      parse_opt_bool(cell("neurodegenerative"), ctx("neurodegenerative"));
  s.history.prior_neuro_illness =
      parse_opt_bool(cell("prior_neuro_illness"), ctx("prior_neuro_illness"));
  s.history.tia_stroke = parse_opt_bool(cell("tia_stroke"), ctx("tia_stroke"));
  s.history.anticoagulant = parse_opt_bool(cell("anticoagulant"), ctx("anticoagulant"));
  s.history.antiplatelet = parse_opt_bool(cell("antiplatelet"), ctx("antiplatelet"));

  for (const auto& analyte : kAnalytes) {
    auto summary = summary_from_cells(cells, analyte, row);
    if (analyte == "creatinine") s.labs.creatinine = summary;
    if (analyte == "lactate") s.labs.lactate = summary;
    if (analyte == "hemoglobin") s.labs.hemoglobin = summary;
    if (analyte == "paco2") s.labs.paco2 = summary;
  }
  return rs;
}

LoadResult load_csv(const std::filesystem::path& path) {
  CsvTable table = parse_csv(read_file(path));
  if (table.header.empty()) throw DataError("cohort table has no header: " + path.string());

  LoadResult result;
  const auto known = csv_columns();
  for (const auto& col : table.header) {
    if (std::find(known.begin(), known.end(), col) == known.end())
      result.warnings.push_back("ignoring unknown column '" + col + "'");
  }

  std::unordered_map<std::string, size_t> seen_ids;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size())
      throw DataError("row " + std::to_string(r + 1) + ": expected " +
                      std::to_string(table.header.size()) + " cells, got " +
                      std::to_string(row.size()));
    std::unordered_map<std::string, std::string> cells;
    for (size_t c = 0; c < row.size(); ++c) cells[table.header[c]] = row[c];
    RawSubject rs = subject_from_cells(cells, r + 1);
    if (!seen_ids.emplace(rs.subject.subject_id, r).second)
      throw DataError("duplicate subject: " + rs.subject.subject_id);
    result.cohort.subjects.push_back(std::move(rs));
  }
  result.cohort.provenance = Provenance::kIngested;
  return result;
}

json summary_to_json(const SeriesSummary& s) {
  return json{{"first", s.first}, {"last", s.last}, {"min", s.min},          {"max", s.max},
              {"mean", s.mean},   {"std", s.std},   {"time_of_max", s.time_of_max}};
}

SeriesSummary summary_from_json(const json& j) {
  SeriesSummary s;
  s.first = j.at("first").get<double>();
  s.last = j.at("last").get<double>();
  s.min = j.at("min").get<double>();
  s.max = j.at("max").get<double>();
  s.mean = j.at("mean").get<double>();
  s.std = j.at("std").get<double>();
  s.time_of_max = j.at("time_of_max").get<double>();
  return s;
}

template <typename T>
void set_if(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

json subject_to_json(const Subject& s, TriState outcome) {
  json j;
  j["subject_id"] = s.subject_id;
  j["pte_outcome"] = tristate_name(outcome);

  json gcs;
  set_if(gcs, "total_worst", s.gcs.total_worst);
  set_if(gcs, "total_best", s.gcs.total_best);
  set_if(gcs, "eye_worst", s.gcs.eye_worst);
  set_if(gcs, "eye_best", s.gcs.eye_best);
  set_if(gcs, "verbal_worst", s.gcs.verbal_worst);
  set_if(gcs, "verbal_best", s.gcs.verbal_best);
  set_if(gcs, "motor_worst", s.gcs.motor_worst);
  set_if(gcs, "motor_best", s.gcs.motor_best);
  j["gcs"] = gcs;

  json course;
  course["icu_admitted"] = s.course.icu_admitted;
  set_if(course, "icu_days", s.course.icu_days);
  course["surgery_performed"] = s.course.surgery_performed;
  set_if(course, "surgery_type", s.course.surgery_type);
  set_if(course, "hours_to_surgery", s.course.hours_to_surgery);
  course["acute_seizure_7d"] = s.course.acute_seizure_7d;
  set_if(course, "operative_note", s.course.operative_note);
  j["course"] = course;

  json ct;
  ct["contusion"] = tristate_name(s.ct.contusion);
  ct["epidural_hematoma"] = tristate_name(s.ct.epidural_hematoma);
  ct["intracerebral_hemorrhage"] = tristate_name(s.ct.intracerebral_hemorrhage);
  ct["skull_fracture"] = tristate_name(s.ct.skull_fracture);
  ct["subarachnoid_hemorrhage"] = tristate_name(s.ct.subarachnoid_hemorrhage);
  set_if(ct, "marshall_score", s.ct.marshall_score);
  j["ct"] = ct;

  json labs;
  if (s.labs.creatinine) labs["creatinine"] = summary_to_json(*s.labs.creatinine);
  if (s.labs.lactate) labs["lactate"] = summary_to_json(*s.labs.lactate);
  if (s.labs.hemoglobin) labs["hemoglobin"] = summary_to_json(*s.labs.hemoglobin);
  if (s.labs.paco2) labs["paco2"] = summary_to_json(*s.labs.paco2);
  j["labs"] = labs;

  json hist;
  hist["age_years"] = s.history.age_years;
  hist["sex"] = s.history.sex;
  hist["race"] = s.history.race;
  set_if(hist, "prior_epilepsy", s.history.prior_epilepsy);
  set_if(hist, "prior_seizures", s.history.prior_seizures);
  set_if(hist, "neurodegenerative", s.history.neurodegenerative);
  set_if(hist, "prior_neuro_illness", s.history.prior_neuro_illness);
  set_if(hist, "tia_stroke", s.history.tia_stroke);
  set_if(hist, "anticoagulant", s.history.anticoagulant);
  set_if(hist, "antiplatelet", s.history.antiplatelet);
  j["history"] = hist;

  json img;
  set_if(img, "ct_report", s.imaging.ct_report);
  set_if(img, "mri_report", s.imaging.mri_report);
  j["imaging"] = img;
  return j;
}

template <typename T>
std::optional<T> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

RawSubject subject_from_json(const json& j, size_t row) {
  try {
    RawSubject rs;
    Subject& s = rs.subject;
    s.subject_id = j.at("subject_id").get<std::string>();
    rs.pte_outcome = tristate_from_name(j.value("pte_outcome", "NOT_REPORTED"));

    const json& gcs = j.value("gcs", json::object());
    s.gcs.total_worst = opt_from<int>(gcs, "total_worst");
    s.gcs.total_best = opt_from<int>(gcs, "total_best");
    s.gcs.eye_worst = opt_from<int>(gcs, "eye_worst");
    s.gcs.eye_best = opt_from<int>(gcs, "eye_best");
    s.gcs.verbal_worst = opt_from<int>(gcs, "verbal_worst");
    s.gcs.verbal_best = opt_from<int>(gcs, "verbal_best");
    s.gcs.motor_worst = opt_from<int>(gcs, "motor_worst");
    s.gcs.motor_best = opt_from<int>(gcs, "motor_best");

    const json& course = j.value("course", json::object());
    s.course.icu_admitted = course.value("icu_admitted", false);
    s.course.icu_days = opt_from<double>(course, "icu_days");
    s.course.surgery_performed = course.value("surgery_performed", false);
    s.course.surgery_type = opt_from<std::string>(course, "surgery_type");
    s.course.hours_to_surgery = opt_from<double>(course, "hours_to_surgery");
    s.course.acute_seizure_7d = course.value("acute_seizure_7d", false);
    s.course.operative_note = opt_from<std::string>(course, "operative_note");

    const json& ct = j.value("ct", json::object());
    s.ct.contusion = tristate_from_name(ct.value("contusion", "NOT_REPORTED"));
    s.ct.epidural_hematoma = tristate_from_name(ct.value("epidural_hematoma", "NOT_REPORTED"));
    s.ct.intracerebral_hemorrhage =
        tristate_from_name(ct.value("intracerebral_hemorrhage", "NOT_REPORTED"));
    s.ct.skull_fracture = tristate_from_name(ct.value("skull_fracture", "NOT_REPORTED"));
    s.ct.subarachnoid_hemorrhage =
        tristate_from_name(ct.value("subarachnoid_hemorrhage", "NOT_REPORTED"));
    s.ct.marshall_score = opt_from<int>(ct, "marshall_score");

    const json& labs = j.value("labs", json::object());
    if (labs.contains("creatinine")) s.labs.creatinine = summary_from_json(labs.at("creatinine"));
    if (labs.contains("lactate")) s.labs.lactate = summary_from_json(labs.at("lactate"));
    if (labs.contains("hemoglobin")) s.labs.hemoglobin = summary_from_json(labs.at("hemoglobin"));
    if (labs.contains("paco2")) s.labs.paco2 = summary_from_json(labs.at("paco2"));

    const json& hist = j.value("history", json::object());
    s.history.age_years = hist.value("age_years", 0);
    s.history.sex = hist.value("sex", "");
    s.history.race = hist.value("race", "");
    s.history.prior_epilepsy = opt_from<bool>(hist, "prior_epilepsy");
    s.history.prior_seizures = opt_from<bool>(hist, "prior_seizures");
    s.history.neurodegenerative = opt_from<bool>(hist, "neurodegenerative");
    s.history.prior_neuro_illness = opt_from<bool>(hist, "prior_neuro_illness");
    s.history.tia_stroke = opt_from<bool>(hist, "tia_stroke");
    s.history.anticoagulant = opt_from<bool>(hist, "anticoagulant");
    s.history.antiplatelet = opt_from<bool>(hist, "antiplatelet");

    const json& img = j.value("imaging", json::object());
    s.imaging.ct_report = opt_from<std::string>(img, "ct_report");
    s.imaging.mri_report = opt_from<std::string>(img, "mri_report");
    return rs;
  } catch (const json::exception& e) {
    throw DataError("record " + std::to_string(row) + ": " + e.what());
  }
}

LoadResult load_jsonl(const std::filesystem::path& path) {
  LoadResult result;
  std::istringstream in(read_file(path));
  std::string line;
  size_t row = 0;
  std::unordered_map<std::string, size_t> seen_ids;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("record " + std::to_string(row) + ": invalid record: " + e.what());
    }
    RawSubject rs = subject_from_json(j, row);
    if (!seen_ids.emplace(rs.subject.subject_id, row).second)
      throw DataError("duplicate subject: " + rs.subject.subject_id);
    result.cohort.subjects.push_back(std::move(rs));
  }
  result.cohort.provenance = Provenance::kIngested;
  return result;
}

}  // namespace

CohortFormat cohort_format_from_name(const std::string& name) {
  if (name == "delimited-table" || name == "csv") return CohortFormat::kDelimitedTable;
  if (name == "structured-records" || name == "jsonl") return CohortFormat::kStructuredRecords;
  throw ConfigError("unknown cohort format: " + name);
}

LoadResult load_cohort(const std::filesystem::path& path, CohortFormat format) {
  return format == CohortFormat::kDelimitedTable ? load_csv(path) : load_jsonl(path);
}

void attach_lab_long_table(RawCohort& cohort, const std::filesystem::path& labs_path) {
  CsvTable table = parse_csv(read_file(labs_path));
  const std::vector<std::string> expected = {"subject_id", "analyte", "time_days", "value"};
  if (table.header != expected)
    throw DataError("lab table header must be subject_id,analyte,time_days,value");

  std::map<std::pair<std::string, std::string>, std::vector<Measurement>> series;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != 4)
      throw DataError("lab table row " + std::to_string(r + 1) + ": expected 4 cells");
    const std::string& analyte = row[1];
    if (std::find(kAnalytes.begin(), kAnalytes.end(), analyte) == kAnalytes.end())
      throw DataError("lab table row " + std::to_string(r + 1) + ", column 'analyte': unknown analyte '" +
                      analyte + "'");
    std::string tcol = "time_days", vcol = "value";
    Measurement m;
    m.time_days = parse_opt_double(row[2], {r + 1, &tcol}).value_or(0.0);
    m.value = parse_opt_double(row[3], {r + 1, &vcol}).value_or(0.0);
    series[{row[0], analyte}].push_back(m);
  }

  std::unordered_map<std::string, RawSubject*> by_id;
  for (auto& rs : cohort.subjects) by_id[rs.subject.subject_id] = &rs;
  for (const auto& [key, measurements] : series) {
    auto it = by_id.find(key.first);
    if (it == by_id.end()) throw DataError("lab table references unknown subject: " + key.first);
    SeriesSummary summary = aggregate_series(measurements);
    LabPanel& labs = it->second->subject.labs;
    if (key.second == "creatinine") labs.creatinine = summary;
    if (key.second == "lactate") labs.lactate = summary;
    if (key.second == "hemoglobin") labs.hemoglobin = summary;
    if (key.second == "paco2") labs.paco2 = summary;
  }
}

std::string cohort_to_csv(const Cohort& cohort) {
  std::string out = render_csv_row(csv_columns());
  for (const Subject& s : cohort.subjects) {
    std::vector<std::string> row;
    row.push_back(s.subject_id);
    row.push_back(s.label ? "yes" : "no");
    row.push_back(opt_int_cell(s.gcs.total_worst));
    row.push_back(opt_int_cell(s.gcs.total_best));
    row.push_back(opt_int_cell(s.gcs.eye_worst));
    row.push_back(opt_int_cell(s.gcs.eye_best));
    row.push_back(opt_int_cell(s.gcs.verbal_worst));
    row.push_back(opt_int_cell(s.gcs.verbal_best));
    row.push_back(opt_int_cell(s.gcs.motor_worst));
    row.push_back(opt_int_cell(s.gcs.motor_best));
    row.push_back(bool_cell(s.course.icu_admitted));
    row.push_back(opt_double_cell(s.course.icu_days));
    row.push_back(bool_cell(s.course.surgery_performed));
    row.push_back(opt_text_cell(s.course.surgery_type));
    row.push_back(opt_double_cell(s.course.hours_to_surgery));
    row.push_back(bool_cell(s.course.acute_seizure_7d));
    row.push_back(opt_text_cell(s.course.operative_note));
    row.push_back(tristate_name(s.ct.contusion));
    row.push_back(tristate_name(s.ct.epidural_hematoma));
    row.push_back(tristate_name(s.ct.intracerebral_hemorrhage));
    row.push_back(tristate_name(s.ct.skull_fracture));
    row.push_back(tristate_name(s.ct.subarachnoid_hemorrhage));
    row.push_back(opt_int_cell(s.ct.marshall_score));
    row.push_back(opt_text_cell(s.imaging.ct_report));
    row.push_back(opt_text_cell(s.imaging.mri_report));
    row.push_back(std::to_string(s.history.age_years));
    row.push_back(s.history.sex);
    row.push_back(s.history.race);
    row.push_back(opt_bool_cell(s.history.prior_epilepsy));
    row.push_back(opt_bool_cell(s.history.prior_seizures));
    row.push_back(opt_bool_cell(s.history.neurodegenerative));
    row.push_back(opt_bool_cell(s.history.prior_neuro_illness));
    row.push_back(opt_bool_cell(s.history.tia_stroke));
    row.push_back(opt_bool_cell(s.history.anticoagulant));
    row.push_back(opt_bool_cell(s.history.antiplatelet));
    summary_cells(s.labs.creatinine, row);
    summary_cells(s.labs.lactate, row);
    summary_cells(s.labs.hemoglobin, row);
    summary_cells(s.labs.paco2, row);
    out += render_csv_row(row);
  }
  return out;
}

std::string cohort_to_jsonl(const Cohort& cohort) {
  std::string out;
  for (const Subject& s : cohort.subjects) {
    out += subject_to_json(s, s.label ? TriState::kPresent : TriState::kAbsent).dump();
    out.push_back('\n');
  }
  return out;
}

void save_cohort_csv(const Cohort& cohort, const std::filesystem::path& path) {
  atomic_write_file(path, cohort_to_csv(cohort));
}

void save_cohort_jsonl(const Cohort& cohort, const std::filesystem::path& path) {
  atomic_write_file(path, cohort_to_jsonl(cohort));
}

}  // namespace pterisk
