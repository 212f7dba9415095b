#include <cstdio>
#include <sstream>

#include "archiprompt/analytics.hpp"

namespace archiprompt::analytics {
namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string format_p(double p) {
  if (p < 0.001) return "< .001";
  return fixed(p, 3);
}

std::string anova_text(const AnovaTable& t) {
  std::ostringstream out;
  out << pad("Source", 10, true) << pad("Sum of Squares", 16) << pad("df", 6) << pad("Mean Square", 14)
      << pad("F-value", 10) << pad("p-value", 10) << '\n';
  out << pad("Group", 10, true) << pad(fixed(t.ss_between, 3), 16) << pad(std::to_string(t.df_between), 6)
      << pad(fixed(t.ms_between, 3), 14) << pad(fixed(t.f_value, 2), 10) << pad(format_p(t.p_value), 10) << '\n';
  out << pad("Residual", 10, true) << pad(fixed(t.ss_within, 3), 16) << pad(std::to_string(t.df_within), 6)
      << pad(fixed(t.ms_within, 3), 14) << '\n';
  return out.str();
}

std::string tukey_text(std::span<const TukeyRow> rows) {
  std::ostringstream out;
  out << pad("group1", 8, true) << pad("group2", 8, true) << pad("meandiff", 10) << pad("p-adj", 8)
      << pad("lower", 10) << pad("upper", 10) << pad("reject", 8) << '\n';
  for (const auto& r : rows) {
    out << pad("Group" + std::to_string(r.group_a), 8, true) << pad("Group" + std::to_string(r.group_b), 8, true)
        << pad(fixed(r.meandiff, 4), 10) << pad(fixed(r.p_adj, 4), 8) << pad(fixed(r.lower, 4), 10)
        << pad(fixed(r.upper, 4), 10) << pad(r.reject ? "TRUE" : "FALSE", 8) << '\n';
  }
  return out.str();
}

std::string correlation_text(const CorrelationMatrix& m) {
  std::ostringstream out;
  std::size_t w = 8;
  for (const auto& v : m.variables) w = std::max(w, v.size() + 2);
  out << pad("", w, true);
  for (const auto& v : m.variables) out << pad(v, w);
  out << '\n';
  for (std::size_t i = 0; i < m.variables.size(); ++i) {
    out << pad(m.variables[i], w, true);
    for (std::size_t j = 0; j < m.variables.size(); ++j) out << pad(fixed(m.r[i][j], 2), w);
    out << '\n';
  }
  out << "n = " << m.n << '\n';
  return out.str();
}

std::string survey_text(const SurveySummary& s) {
  std::ostringstream out;
  out << pad("instrument", 12, true) << pad("question", 10) << pad("group", 7) << pad("1", 5) << pad("2", 5)
      << pad("3", 5) << pad("4", 5) << pad("5", 5) << pad("n", 5) << pad("median", 8) << '\n';
  for (const auto& c : s.cells) {
    out << pad(std::string(to_string(c.instrument)), 12, true) << pad(std::to_string(c.question_id), 10)
        << pad(std::to_string(c.group), 7);
    for (auto n : c.counts) out << pad(std::to_string(n), 5);
    out << pad(std::to_string(c.respondents), 5) << pad(fixed(c.median, 1), 8) << '\n';
  }
  if (!s.open_answers.empty()) {
    out << "\nOpen responses\n";
    for (const auto& a : s.open_answers)
      out << to_string(a.instrument) << " Q" << a.question_id << " group " << a.group << " " << a.participant_id
          << ": " << a.text << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const AnovaTable& t) {
  return {
      {"rows",
       {{{"source", "Group"},
         {"sum_of_squares", t.ss_between},
         {"df", t.df_between},
         {"mean_square", t.ms_between},
         {"f_value", t.f_value},
         {"p_value", t.p_value}},
        {{"source", "Residual"}, {"sum_of_squares", t.ss_within}, {"df", t.df_within}, {"mean_square", t.ms_within}}}},
  };
}

nlohmann::json to_json(std::span<const TukeyRow> rows) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows)
    out.push_back({{"group1", r.group_a},
                   {"group2", r.group_b},
                   {"meandiff", r.meandiff},
                   {"p_adj", r.p_adj},
                   {"lower", r.lower},
                   {"upper", r.upper},
                   {"reject", r.reject}});
  return out;
}

nlohmann::json to_json(const CorrelationMatrix& m) {
  return {{"variables", m.variables}, {"r", m.r}, {"n", m.n}};
}

nlohmann::json to_json(const SurveySummary& s) {
  auto cells = nlohmann::json::array();
  for (const auto& c : s.cells)
    cells.push_back({{"instrument", to_string(c.instrument)},
                     {"question_id", c.question_id},
                     {"group", c.group},
                     {"counts", c.counts},
                     {"respondents", c.respondents},
                     {"median", c.median}});
  auto open = nlohmann::json::array();
  for (const auto& a : s.open_answers)
    open.push_back({{"instrument", to_string(a.instrument)},
                    {"question_id", a.question_id},
                    {"group", a.group},
                    {"participant_id", a.participant_id},
                    {"text", a.text}});
  return {{"cells", cells}, {"open_answers", open}};
}

}  // namespace archiprompt::analytics
