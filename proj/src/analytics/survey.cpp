#include <algorithm>
#include <fstream>
#include <map>
#include <tuple>

#include <boost/tokenizer.hpp>

#include "archiprompt/analytics.hpp"
#include "csv.hpp"

namespace archiprompt::analytics {
namespace {

constexpr SurveyQuestion kQuestions[] = {
    {Instrument::pre, 1, true, "I have overall experience with AI tools."},
    {Instrument::pre, 2, true, "I frequently use AI tools in my academic or professional work."},
    {Instrument::pre, 3, true, "I am confident in my ability to learn and adapt to new AI tools."},
    {Instrument::pre, 4, true, "I actively seek out AI tools to enhance my work processes."},
    {Instrument::pre, 5, true, "I am familiar with text-to-image AI tools."},
    {Instrument::pre, 6, true, "I have used text-to-image AI tools for generating visual content."},
    {Instrument::pre, 7, true, "I can create effective prompts for text-to-image AI tools."},
    {Instrument::pre, 8, true, "I have been satisfied with the outcomes generated by text-to-image AI tools in the past."},
    {Instrument::pre, 9, true, "I am confident in my ability to improve AI-generated images through prompt refinement."},

    {Instrument::post, 1, true, "I am confident in my ability to create effective prompts for text-to-image AI tools."},
    {Instrument::post, 2, true, "I understand how to structure prompts to achieve desired visual outcomes."},
    {Instrument::post, 3, true, "I am confident in my ability to improve AI-generated images through prompt refinement."},
    {Instrument::post, 4, true, "My prompting skills have improved as a result of this experiment."},
    {Instrument::post, 5, true, "My understanding of AI tools in architectural design has enhanced."},
    {Instrument::post, 6, true,
     "I am more likely to use text-to-image AI tools in my future academic or professional work."},
    {Instrument::post, 7, true, "The tailored prompting guide was helpful in assisting me to create better prompts."},
    {Instrument::post, 8, true, "The AI personas enhanced my understanding of architectural concepts."},
    {Instrument::post, 9, true, "The AI personas were effective in improving my prompting skills."},
    {Instrument::post, 10, true, "I am satisfied with the quality of the images generated based on my prompts."},
    {Instrument::post, 11, true, "The immediate feedback provided on my prompts was useful."},
    {Instrument::post, 12, true, "The experiment enhanced my creativity in architectural design."},
    {Instrument::post, 13, true, "I found the experiment engaging and enjoyable."},
    {Instrument::post, 14, true, "Compared to before the experiment, my overall experience with AI tools is now better."},
    {Instrument::post, 15, true,
     "Compared to before the experiment, my ability to create effective prompts has improved."},
    {Instrument::post, 16, false,
     "What aspects of the customized GPT (AI personas, prompting guide, feedback) did you find most helpful?"},
    {Instrument::post, 17, false,
     "What suggestions do you have for improving the customized GPT or the overall experience?"},
    {Instrument::post, 18, false, "Please describe any challenges you faced during the experiment."},
    {Instrument::post, 19, false, "How do you think AI tools like this can impact architectural education and practice?"},
    {Instrument::post, 20, false, "Any additional comments or feedback:"},
};

constexpr std::string_view kSurveyColumns[] = {"participant_id", "group", "instrument", "question_id", "level"};

double median_of(const std::array<std::size_t, 5>& counts, std::size_t n) {
  auto nth = [&](std::size_t idx) {
    std::size_t seen = 0;
    for (int level = 0; level < 5; ++level) {
      seen += counts[level];
      if (idx < seen) return level + 1;
    }
    return 5;
  };
  if (n == 0) return 0.0;
  if (n % 2 == 1) return nth(n / 2);
  return 0.5 * (nth(n / 2 - 1) + nth(n / 2));
}

}  // namespace

std::string_view to_string(Instrument i) { return i == Instrument::pre ? "pre" : "post"; }

Instrument parse_instrument(std::string_view name) {
  if (name == "pre") return Instrument::pre;
  if (name == "post") return Instrument::post;
  throw UnknownQuestion("unknown instrument '" + std::string(name) + "'", {{"instrument", name}});
}

std::span<const SurveyQuestion> survey_questions() { return kQuestions; }

const SurveyQuestion* find_question(Instrument instrument, int id) {
  for (const auto& q : kQuestions)
    if (q.instrument == instrument && q.id == id) return &q;
  return nullptr;
}

SurveySummary survey_summary(std::span<const SurveyResponse> responses) {
  std::map<std::tuple<int, int, int>, SurveyCell> cells;
  SurveySummary out;
  for (const auto& r : responses) {
    const auto* q = find_question(r.instrument, r.question_id);
    if (!q)
      throw UnknownQuestion(std::string(to_string(r.instrument)) + " question " + std::to_string(r.question_id) +
                                " is not registered",
                            {{"instrument", to_string(r.instrument)}, {"question_id", r.question_id}});
    if (!q->likert) {
      out.open_answers.push_back({r.instrument, r.question_id, r.group, r.participant_id, r.text});
      continue;
    }
    if (!r.level || *r.level < 1 || *r.level > 5)
      throw LevelOutOfRange("level must be 1 to 5",
                            {{"question_id", r.question_id}, {"level", r.level ? nlohmann::json(*r.level) : nullptr}});
    auto key = std::make_tuple(static_cast<int>(r.instrument), r.question_id, r.group);
    auto [it, fresh] = cells.try_emplace(key, SurveyCell{r.instrument, r.question_id, r.group});
    ++it->second.counts[*r.level - 1];
    ++it->second.respondents;
  }
  for (auto& [key, cell] : cells) {
    cell.median = median_of(cell.counts, cell.respondents);
    out.cells.push_back(cell);
  }
  return out;
}

std::vector<SurveyResponse> parse_survey(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line != "\r") break;
  }
  if (line.empty()) throw SchemaError("survey is empty", {{"column", "participant_id"}});
  const auto idx = csv::header_index(csv::split_line(line), kSurveyColumns);
  const auto response_col = idx.find("response");

  std::vector<SurveyResponse> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fail = [&](const std::string& why) -> ValueError {
      return ValueError("line " + std::to_string(line_no) + ": " + why, {{"line", line_no}});
    };
    std::vector<std::string> f;
    try {
      f = csv::split_line(line);
    } catch (const boost::escaped_list_error&) {
      throw fail("malformed quoting");
    }
    auto get = [&](std::string_view col) -> std::string {
      auto i = idx.at(std::string(col));
      return i < f.size() ? f[i] : std::string();
    };

    SurveyResponse r;
    r.participant_id = get("participant_id");
    if (r.participant_id.empty()) throw fail("participant_id is empty");
    auto group = csv::to_int(get("group"));
    if (!group || *group < 1 || *group > 3) throw fail("group must be 1, 2 or 3");
    r.group = static_cast<int>(*group);
    r.instrument = parse_instrument(get("instrument"));
    auto qid = csv::to_int(get("question_id"));
    if (!qid) throw fail("question_id must be an integer");
    r.question_id = static_cast<int>(*qid);
    const auto level = get("level");
    if (!level.empty()) {
      auto lv = csv::to_int(level);
      if (!lv) throw fail("level must be an integer");
      if (*lv < 1 || *lv > 5)
        throw LevelOutOfRange("line " + std::to_string(line_no) + ": level " + level + " outside 1 to 5",
                              {{"line", line_no}, {"level", *lv}});
      r.level = static_cast<int>(*lv);
    }
    if (response_col != idx.end() && response_col->second < f.size()) r.text = f[response_col->second];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SurveyResponse> ingest_survey(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open survey " + path.string(), {{"path", path.string()}});
  return parse_survey(in);
}

}  // namespace archiprompt::analytics
