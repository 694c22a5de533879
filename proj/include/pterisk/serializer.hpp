#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "pterisk/cohort.hpp"

namespace pterisk {

inline constexpr const char* kMissingToken = "NOT_REPORTED";

struct AspectParagraph {
  AspectId aspect = AspectId::kGcs;
  std::string context_tag;
  std::string text;  // single line, begins with "<context_tag>: "

  bool operator==(const AspectParagraph&) const = default;
};

const std::string& aspect_context_tag(AspectId aspect);

// Fixed-template rendering of one clinical aspect. Total over all subjects
// that satisfy the cohort invariants; absent values render as NOT_REPORTED.
AspectParagraph serialize_aspect(const Subject& subject, AspectId aspect);

// All six paragraphs in fixed aspect order.
std::array<AspectParagraph, kAspectCount> serialize_all(const Subject& subject);

// Single-embedding ablation variant: six paragraph texts joined in fixed
// aspect order with single spaces under the tag "Combined Clinical Record".
AspectParagraph concatenate_paragraphs(const std::vector<AspectParagraph>& paragraphs);

// Line-delimited export consumed by the embedder and by external services.
struct ParagraphRecord {
  std::string subject_id;
  AspectParagraph paragraph;
};

std::string paragraphs_to_jsonl(const std::vector<ParagraphRecord>& records);
std::vector<ParagraphRecord> paragraphs_from_jsonl(const std::string& content);
void save_paragraphs(const std::vector<ParagraphRecord>& records,
                     const std::filesystem::path& path);
std::vector<ParagraphRecord> load_paragraphs(const std::filesystem::path& path);

}  // namespace pterisk
