#include "surveymix/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace surveymix {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

MissingPolicy parse_policy(const std::string& s) {
  if (s == "own_category" || s == "own-category") return MissingPolicy::own_category;
  if (s == "drop" || s == "drop-from-likelihood") return MissingPolicy::drop;
  throw std::invalid_argument("schema: unknown missing_policy '" + s + "'");
}

std::string policy_name(MissingPolicy p) {
  return p == MissingPolicy::own_category ? "own_category" : "drop";
}

}  // namespace

int SurveyDataset::total_categories() const {
  int total = 0;
  for (const auto& q : questions) total += q.n_categories;
  return total;
}

void SurveyDataset::validate() const {
  const int n = n_respondents();
  const int j_count = n_questions();
  if (j_count == 0) throw std::invalid_argument("dataset: no questions");
  if (n == 0) throw std::invalid_argument("dataset: no respondents");
  if (int(labels.size()) != n) {
    throw std::invalid_argument("dataset: label vector length mismatch");
  }
  if (n_labels < 1) throw std::invalid_argument("dataset: no groups/periods");
  for (int j = 1; j <= j_count; ++j) {
    const auto& q = questions[std::size_t(j - 1)];
    if (q.n_categories < 2) {
      throw std::invalid_argument("dataset: question '" + q.name +
                                  "' has fewer than 2 categories");
    }
    if (int(q.category_labels.size()) != q.n_categories) {
      throw std::invalid_argument("dataset: question '" + q.name +
                                  "' label count mismatch");
    }
  }
  std::vector<int> per_label(std::size_t(n_labels), 0);
  for (int i = 0; i < n; ++i) {
    const std::int32_t lab = labels[std::size_t(i)];
    if (lab < 1 || lab > n_labels) {
      throw std::invalid_argument("dataset: label out of range at row " +
                                  std::to_string(i + 1));
    }
    ++per_label[std::size_t(lab - 1)];
    for (int j = 1; j <= j_count; ++j) {
      const std::int32_t v = responses(std::size_t(i), std::size_t(j - 1));
      if (v == kMissing) continue;
      if (v < 1 || v > n_categories(j)) {
        throw std::invalid_argument("dataset: response out of range at row " +
                                    std::to_string(i + 1) + ", question " +
                                    questions[std::size_t(j - 1)].name);
      }
    }
  }
  for (int g = 0; g < n_labels; ++g) {
    if (per_label[std::size_t(g)] == 0) {
      throw std::invalid_argument("dataset: group/period " +
                                  std::to_string(g + 1) + " has no respondents");
    }
  }
}

IngestSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("schema: cannot open " + path.string());
  json doc = json::parse(in);

  IngestSchema schema;
  const std::string mode = doc.at("mode").get<std::string>();
  if (mode == "static") schema.mode = Mode::Static;
  else if (mode == "dynamic") schema.mode = Mode::Dynamic;
  else throw std::invalid_argument("schema: mode must be static or dynamic");

  schema.label_column = doc.at("label_column").get<std::string>();
  if (doc.contains("id_column")) schema.id_column = doc["id_column"].get<std::string>();
  if (doc.contains("missing_code")) schema.missing_code = doc["missing_code"].get<std::string>();
  if (doc.contains("labels")) schema.labels = doc["labels"].get<std::vector<std::string>>();

  for (const auto& q : doc.at("questions")) {
    QuestionSchema qs;
    qs.name = q.at("name").get<std::string>();
    qs.categories = q.at("categories").get<std::vector<std::string>>();
    if (q.contains("missing_policy")) {
      qs.missing_policy = parse_policy(q["missing_policy"].get<std::string>());
    }
    if (qs.categories.size() < 2 &&
        !(qs.missing_policy == MissingPolicy::own_category && qs.categories.size() >= 1)) {
      throw std::invalid_argument("schema: question '" + qs.name +
                                  "' needs at least 2 categories");
    }
    schema.questions.push_back(std::move(qs));
  }
  if (schema.questions.empty()) {
    throw std::invalid_argument("schema: no questions declared");
  }
  return schema;
}

void write_schema(const IngestSchema& schema, const std::filesystem::path& path) {
  json doc;
  doc["mode"] = schema.mode == Mode::Static ? "static" : "dynamic";
  doc["id_column"] = schema.id_column;
  doc["label_column"] = schema.label_column;
  doc["missing_code"] = schema.missing_code;
  if (!schema.labels.empty()) doc["labels"] = schema.labels;
  doc["questions"] = json::array();
  for (const auto& q : schema.questions) {
    json qj;
    qj["name"] = q.name;
    qj["categories"] = q.categories;
    qj["missing_policy"] = policy_name(q.missing_policy);
    doc["questions"].push_back(qj);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("schema: cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

SurveyDataset load_csv(const std::filesystem::path& path,
                       const IngestSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file");
  const auto header = split_csv_line(line);
  std::map<std::string, int> col_of;
  for (std::size_t c = 0; c < header.size(); ++c) col_of[header[c]] = int(c);

  auto require_col = [&](const std::string& name) {
    const auto it = col_of.find(name);
    if (it == col_of.end()) {
      throw std::runtime_error("load_csv: column '" + name + "' not found");
    }
    return it->second;
  };

  const int label_col = require_col(schema.label_column);
  const bool has_id = col_of.count(schema.id_column) > 0;
  const int id_col = has_id ? col_of[schema.id_column] : -1;

  const int j_count = int(schema.questions.size());
  std::vector<int> question_col(static_cast<std::size_t>(j_count));
  std::vector<std::map<std::string, int>> code_of(static_cast<std::size_t>(j_count));
  SurveyDataset data;
  data.mode = schema.mode;
  data.missing_code = schema.missing_code;
  data.id_column = schema.id_column;
  data.label_column = schema.label_column;
  for (int j = 0; j < j_count; ++j) {
    const auto& qs = schema.questions[std::size_t(j)];
    question_col[std::size_t(j)] = require_col(qs.name);
    QuestionMeta meta;
    meta.name = qs.name;
    meta.missing_policy = qs.missing_policy;
    meta.category_labels = qs.categories;
    for (std::size_t v = 0; v < qs.categories.size(); ++v) {
      code_of[std::size_t(j)][qs.categories[v]] = int(v) + 1;
    }
    if (qs.missing_policy == MissingPolicy::own_category) {
      meta.category_labels.push_back(schema.missing_code);
    }
    meta.n_categories = int(meta.category_labels.size());
    data.questions.push_back(std::move(meta));
  }

  std::map<std::string, int> label_index;
  for (std::size_t g = 0; g < schema.labels.size(); ++g) {
    label_index[schema.labels[g]] = int(g) + 1;
  }

  std::vector<std::vector<std::int32_t>> rows;
  int row_number = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < header.size()) {
      throw std::runtime_error("load_csv: row " + std::to_string(row_number) +
                               " has too few fields");
    }
    std::vector<std::int32_t> row(std::size_t(j_count) + 1);

    const std::string& label_code = fields[std::size_t(label_col)];
    int label;
    if (!schema.labels.empty()) {
      const auto it = label_index.find(label_code);
      if (it == label_index.end()) {
        throw std::runtime_error("load_csv: row " + std::to_string(row_number) +
                                 " column '" + schema.label_column +
                                 "': unknown label '" + label_code + "'");
      }
      label = it->second;
    } else {
      try {
        label = std::stoi(label_code);
      } catch (const std::exception&) {
        throw std::runtime_error("load_csv: row " + std::to_string(row_number) +
                                 " column '" + schema.label_column +
                                 "': label '" + label_code +
                                 "' is not an integer index");
      }
      if (label < 1) {
        throw std::runtime_error("load_csv: row " + std::to_string(row_number) +
                                 ": label indices must start at 1");
      }
    }
    row[0] = label;

    for (int j = 0; j < j_count; ++j) {
      const auto& qs = schema.questions[std::size_t(j)];
      const std::string& code = fields[std::size_t(question_col[std::size_t(j)])];
      std::int32_t v;
      if (code == schema.missing_code) {
        v = qs.missing_policy == MissingPolicy::own_category
                ? std::int32_t(qs.categories.size()) + 1
                : kMissing;
      } else {
        const auto it = code_of[std::size_t(j)].find(code);
        if (it == code_of[std::size_t(j)].end()) {
          throw std::runtime_error("load_csv: row " + std::to_string(row_number) +
                                   " column '" + qs.name +
                                   "': unknown category '" + code + "'");
        }
        v = it->second;
      }
      row[std::size_t(j) + 1] = v;
    }
    rows.push_back(std::move(row));
    data.ids.push_back(has_id ? fields[std::size_t(id_col)]
                              : std::to_string(row_number - 1));
  }

  const int n = int(rows.size());
  if (n == 0) throw std::runtime_error("load_csv: no data rows");

  int n_labels = int(schema.labels.size());
  if (n_labels == 0) {
    for (const auto& row : rows) n_labels = std::max(n_labels, int(row[0]));
  }
  data.n_labels = n_labels;
  if (!schema.labels.empty()) {
    data.label_names = schema.labels;
  } else {
    for (int g = 1; g <= n_labels; ++g) data.label_names.push_back(std::to_string(g));
  }

  data.responses = MatI(std::size_t(n), std::size_t(j_count));
  data.labels.resize(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    data.labels[std::size_t(i)] = rows[std::size_t(i)][0];
    for (int j = 0; j < j_count; ++j) {
      data.responses(std::size_t(i), std::size_t(j)) = rows[std::size_t(i)][std::size_t(j) + 1];
    }
  }

  // Reject questions whose observed support is degenerate: a question
  // answered with a single category cannot separate types.
  for (int j = 1; j <= j_count; ++j) {
    std::set<std::int32_t> seen;
    for (int i = 0; i < n; ++i) {
      const std::int32_t v = data.responses(std::size_t(i), std::size_t(j - 1));
      if (v != kMissing) seen.insert(v);
    }
    if (int(seen.size()) < 2) {
      throw std::runtime_error("load_csv: question '" +
                               data.questions[std::size_t(j - 1)].name +
                               "' has fewer than 2 observed categories");
    }
  }

  data.validate();
  return data;
}

void write_csv(const SurveyDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot write " + path.string());
  out << csv_escape(data.id_column) << "," << csv_escape(data.label_column);
  for (const auto& q : data.questions) out << "," << csv_escape(q.name);
  out << "\n";
  const int n = data.n_respondents();
  for (int i = 0; i < n; ++i) {
    const std::string id = i < int(data.ids.size()) ? data.ids[std::size_t(i)]
                                                    : std::to_string(i + 1);
    out << csv_escape(id) << ","
        << csv_escape(data.label_names[std::size_t(data.labels[std::size_t(i)] - 1)]);
    for (int j = 1; j <= data.n_questions(); ++j) {
      const std::int32_t v = data.responses(std::size_t(i), std::size_t(j - 1));
      out << ",";
      if (v == kMissing) {
        out << csv_escape(data.missing_code);
      } else {
        out << csv_escape(
            data.questions[std::size_t(j - 1)].category_labels[std::size_t(v - 1)]);
      }
    }
    out << "\n";
  }
}

FrequencyMatrix frequency_matrix(const SurveyDataset& data) {
  FrequencyMatrix fm;
  fm.offsets.resize(std::size_t(data.n_questions()));
  int total = 0;
  for (int j = 1; j <= data.n_questions(); ++j) {
    fm.offsets[std::size_t(j - 1)] = total;
    total += data.n_categories(j);
  }
  fm.counts = Matrix<std::int64_t>(std::size_t(data.n_labels), std::size_t(total), 0);
  const int n = data.n_respondents();
  for (int i = 0; i < n; ++i) {
    const int g = data.labels[std::size_t(i)];
    for (int j = 1; j <= data.n_questions(); ++j) {
      const std::int32_t v = data.responses(std::size_t(i), std::size_t(j - 1));
      if (v == kMissing) continue;
      ++fm.counts(std::size_t(g - 1), std::size_t(fm.col(j, v)));
    }
  }
  return fm;
}

std::vector<RareResponse> rare_response_report(const SurveyDataset& data,
                                               double threshold) {
  if (!(threshold > 0.0) || threshold > 1.0) {
    throw std::invalid_argument("rare_response_report: threshold must be in (0, 1]");
  }
  std::vector<RareResponse> report;
  const int n = data.n_respondents();
  for (int j = 1; j <= data.n_questions(); ++j) {
    const int l = data.n_categories(j);
    std::vector<std::int64_t> counts(std::size_t(l), 0);
    std::int64_t answered = 0;
    for (int i = 0; i < n; ++i) {
      const std::int32_t v = data.responses(std::size_t(i), std::size_t(j - 1));
      if (v == kMissing) continue;
      ++counts[std::size_t(v - 1)];
      ++answered;
    }
    if (answered == 0) continue;
    for (int v = 1; v <= l; ++v) {
      const double freq = double(counts[std::size_t(v - 1)]) / double(answered);
      if (freq < threshold) report.push_back({j, v, freq});
    }
  }
  return report;
}

SurveyDataset subset_per_label(const SurveyDataset& data, int m) {
  SurveyDataset out;
  out.mode = data.mode;
  out.n_labels = data.n_labels;
  out.questions = data.questions;
  out.label_names = data.label_names;
  out.missing_code = data.missing_code;

  std::vector<int> taken(std::size_t(data.n_labels), 0);
  std::vector<int> keep;
  for (int i = 0; i < data.n_respondents(); ++i) {
    int& t = taken[std::size_t(data.labels[std::size_t(i)] - 1)];
    if (t < m) {
      ++t;
      keep.push_back(i);
    }
  }
  out.responses = MatI(keep.size(), std::size_t(data.n_questions()));
  out.labels.resize(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const int i = keep[r];
    out.labels[r] = data.labels[std::size_t(i)];
    if (!data.ids.empty()) out.ids.push_back(data.ids[std::size_t(i)]);
    for (int j = 0; j < data.n_questions(); ++j) {
      out.responses(r, std::size_t(j)) = data.responses(std::size_t(i), std::size_t(j));
    }
  }
  out.validate();
  return out;
}

}  // namespace surveymix
