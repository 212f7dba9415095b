#pragma once

// Experiment statistics over recorded sessions: one-way ANOVA, Tukey HSD
// (Tukey-Kramer for unequal group sizes), Pearson correlation matrices and
// Likert survey summaries.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "archiprompt/errors.hpp"

namespace archiprompt::analytics {

ARCHIPROMPT_DEFINE_ERROR(SchemaError, validation);
ARCHIPROMPT_DEFINE_ERROR(ValueError, validation);
ARCHIPROMPT_DEFINE_ERROR(DegenerateGroups, validation);
ARCHIPROMPT_DEFINE_ERROR(ZeroWithinVariance, validation);
ARCHIPROMPT_DEFINE_ERROR(DomainError, validation);
ARCHIPROMPT_DEFINE_ERROR(ConstantVariable, validation);
ARCHIPROMPT_DEFINE_ERROR(InsufficientData, validation);
ARCHIPROMPT_DEFINE_ERROR(UnknownQuestion, validation);
ARCHIPROMPT_DEFINE_ERROR(LevelOutOfRange, validation);

// ---------------------------------------------------------------------------
// Dataset

enum class Metric { word_count, time_minutes, similarity_pct, concreteness };

inline constexpr std::array<Metric, 4> kAllMetrics = {Metric::time_minutes, Metric::word_count,
                                                      Metric::similarity_pct, Metric::concreteness};

std::string_view to_string(Metric m);
/// Accepts column names and the short forms `time`, `similarity`.
Metric parse_metric(std::string_view name);

struct DatasetRow {
  std::string participant_id;
  int group = 1;
  std::string task_id;
  long long word_count = 0;
  double time_minutes = 0.0;
  double similarity_pct = 0.0;
  std::optional<double> concreteness;  // empty when the prompt was unscorable

  friend bool operator==(const DatasetRow&, const DatasetRow&) = default;
};

struct ExperimentDataset {
  std::vector<DatasetRow> rows;

  /// Values of one metric and their group labels, skipping missing values.
  void column(Metric m, std::vector<double>& values, std::vector<int>& groups) const;
};

inline constexpr std::string_view kDatasetHeader =
    "participant_id,group,task_id,word_count,time_minutes,similarity_pct,concreteness";

ExperimentDataset parse_dataset(std::istream& in);
ExperimentDataset ingest_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const ExperimentDataset& data);
std::string dataset_csv(const ExperimentDataset& data);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Distributions

/// P(F > f) for F ~ F(df1, df2).
double f_upper_tail(double f, double df1, double df2);

/// P(range of k iid standard normals <= w); the studentized range
/// distribution with infinite denominator degrees of freedom.
double normal_range_cdf(double w, double k);

/// P(Q > q) for the studentized range with k groups and df degrees of
/// freedom (df may be +infinity).
double studentized_range_upper_tail(double q, double k, double df);

/// q such that P(Q > q) = alpha.
double studentized_range_quantile(double alpha, double k, double df);

// ---------------------------------------------------------------------------
// ANOVA and Tukey HSD

struct AnovaTable {
  double ss_between = 0.0;
  double ss_within = 0.0;
  int df_between = 0;
  int df_within = 0;
  double ms_between = 0.0;
  double ms_within = 0.0;
  double f_value = 0.0;
  double p_value = 1.0;
};

/// Fills mean squares, F and p from sums of squares and degrees of freedom.
AnovaTable anova_from_sums(double ss_between, double ss_within, int df_between, int df_within);

/// One-way ANOVA of `values` partitioned by `groups` (parallel spans).
AnovaTable anova_oneway(std::span<const double> values, std::span<const int> groups);
AnovaTable anova_oneway(const ExperimentDataset& data, Metric metric);

struct GroupSummary {
  int label = 0;
  std::size_t n = 0;
  double mean = 0.0;
};

std::vector<GroupSummary> summarize_groups(std::span<const double> values, std::span<const int> groups);

struct TukeyRow {
  int group_a = 0;
  int group_b = 0;
  double meandiff = 0.0;  // mean(b) - mean(a)
  double p_adj = 1.0;
  double lower = 0.0;
  double upper = 0.0;
  bool reject = false;
};

/// Pairwise comparisons from group summaries and the ANOVA error term.
std::vector<TukeyRow> tukey_from_summary(std::span<const GroupSummary> groups, double mse, double df_within,
                                         double alpha = 0.05);
std::vector<TukeyRow> tukey_hsd(std::span<const double> values, std::span<const int> groups, double alpha = 0.05);
std::vector<TukeyRow> tukey_hsd(const ExperimentDataset& data, Metric metric, double alpha = 0.05);

// ---------------------------------------------------------------------------
// Correlation

struct CorrelationMatrix {
  std::vector<std::string> variables;
  std::vector<std::vector<double>> r;
  std::size_t n = 0;  // rows used
};

/// Sample Pearson correlation. Throws ConstantVariable when either input
/// has zero variance and InsufficientData below three points.
double pearson(std::span<const double> x, std::span<const double> y);

/// Correlations over rows where every requested metric is present,
/// optionally restricted to one group.
CorrelationMatrix pearson_matrix(const ExperimentDataset& data, std::span<const Metric> variables,
                                 std::optional<int> group = std::nullopt);

// ---------------------------------------------------------------------------
// Surveys

enum class Instrument { pre, post };

std::string_view to_string(Instrument i);
Instrument parse_instrument(std::string_view name);

struct SurveyQuestion {
  Instrument instrument;
  int id;
  bool likert;
  std::string_view text;
};

/// Registered pre- and post-experiment questionnaires.
std::span<const SurveyQuestion> survey_questions();
const SurveyQuestion* find_question(Instrument instrument, int id);

struct SurveyResponse {
  std::string participant_id;
  int group = 1;
  Instrument instrument = Instrument::pre;
  int question_id = 0;
  std::optional<int> level;  // 1..5 for Likert items
  std::string text;          // verbatim answer for open items
};

struct SurveyCell {
  Instrument instrument;
  int question_id;
  int group;
  std::array<std::size_t, 5> counts{};  // counts[level - 1]
  std::size_t respondents = 0;
  double median = 0.0;
};

struct OpenAnswer {
  Instrument instrument;
  int question_id;
  int group;
  std::string participant_id;
  std::string text;
};

struct SurveySummary {
  std::vector<SurveyCell> cells;  // sorted by instrument, question, group
  std::vector<OpenAnswer> open_answers;
};

SurveySummary survey_summary(std::span<const SurveyResponse> responses);

/// Header `participant_id,group,instrument,question_id,level`, with an
/// optional trailing `response` column for open items.
std::vector<SurveyResponse> parse_survey(std::istream& in);
std::vector<SurveyResponse> ingest_survey(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Reports

/// "< .001" below 0.001, otherwise three decimals.
std::string format_p(double p);

std::string anova_text(const AnovaTable& t);
std::string tukey_text(std::span<const TukeyRow> rows);
std::string correlation_text(const CorrelationMatrix& m);
std::string survey_text(const SurveySummary& s);

nlohmann::json to_json(const AnovaTable& t);
nlohmann::json to_json(std::span<const TukeyRow> rows);
nlohmann::json to_json(const CorrelationMatrix& m);
nlohmann::json to_json(const SurveySummary& s);

}  // namespace archiprompt::analytics
