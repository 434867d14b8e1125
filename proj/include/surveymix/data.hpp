#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "surveymix/matrix.hpp"

namespace surveymix {

enum class Mode { Static, Dynamic };
enum class MissingPolicy { own_category, drop };

// Missing response sentinel inside the response matrix (drop policy only;
// under own_category the missing code is an ordinary category).
constexpr std::int32_t kMissing = 0;

struct QuestionMeta {
  std::string name;
  int n_categories = 0;  // L_j, includes the missing category under own_category
  std::vector<std::string> category_labels;
  MissingPolicy missing_policy = MissingPolicy::own_category;
};

// Categorical survey data: N respondents by J questions, each respondent
// carrying a group label (static) or period label (dynamic). Immutable
// after construction; chains share it freely.
struct SurveyDataset {
  Mode mode = Mode::Static;
  int n_labels = 0;  // G (static) or T (dynamic)
  std::vector<QuestionMeta> questions;
  MatI responses;                    // N x J, entries 1..L_j or kMissing
  std::vector<std::int32_t> labels;  // N, entries 1..n_labels
  std::vector<std::string> label_names;
  std::vector<std::string> ids;
  std::string missing_code = "NA";
  std::string id_column = "id";
  std::string label_column = "label";

  int n_respondents() const { return int(responses.rows()); }
  int n_questions() const { return int(questions.size()); }
  int n_categories(int j) const { return questions[std::size_t(j - 1)].n_categories; }
  int total_categories() const;

  // Throws std::invalid_argument when any structural invariant fails.
  void validate() const;
};

// Ingest schema: declared category orderings so that coded indices are
// stable across runs and files.
struct QuestionSchema {
  std::string name;
  std::vector<std::string> categories;  // substantive codes, in order
  MissingPolicy missing_policy = MissingPolicy::own_category;
};

struct IngestSchema {
  Mode mode = Mode::Static;
  std::string id_column = "id";
  std::string label_column;
  std::string missing_code = "NA";
  std::vector<std::string> labels;  // optional explicit label ordering
  std::vector<QuestionSchema> questions;
};

IngestSchema load_schema(const std::filesystem::path& path);
void write_schema(const IngestSchema& schema, const std::filesystem::path& path);

SurveyDataset load_csv(const std::filesystem::path& path,
                       const IngestSchema& schema);
void write_csv(const SurveyDataset& data, const std::filesystem::path& path);

// Group-by-response contingency table: G x L counts, L = sum_j L_j.
struct FrequencyMatrix {
  Matrix<std::int64_t> counts;
  std::vector<int> offsets;  // column offset of question j (0-based)

  int col(int j, int v) const { return offsets[std::size_t(j - 1)] + v - 1; }
  int total_columns() const { return int(counts.cols()); }
};

FrequencyMatrix frequency_matrix(const SurveyDataset& data);

struct RareResponse {
  int question;  // 1..J
  int category;  // 1..L_j
  double frequency;
};

// Every (question, category) whose within-question sample frequency falls
// below the threshold; candidates for dropping or merging ahead of
// estimation.
std::vector<RareResponse> rare_response_report(const SurveyDataset& data,
                                               double threshold);

// First m respondents of every group/period, preserving order. Used by
// nested-sample experiments.
SurveyDataset subset_per_label(const SurveyDataset& data, int m);

}  // namespace surveymix
