#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/tokenizer.hpp>

#include "archiprompt/analytics.hpp"
#include "csv.hpp"

namespace archiprompt::analytics {

namespace csv {

std::vector<std::string> split_line(const std::string& line) {
  using Sep = boost::escaped_list_separator<char>;
  boost::tokenizer<Sep> tok(line, Sep('\\', ',', '"'));
  std::vector<std::string> out(tok.begin(), tok.end());
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\\") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::map<std::string, std::size_t> header_index(const std::vector<std::string>& header,
                                                std::span<const std::string_view> required) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) idx[header[i]] = i;
  for (auto col : required)
    if (!idx.count(std::string(col)))
      throw SchemaError("missing column '" + std::string(col) + "'", {{"column", col}});
  return idx;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> to_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace csv

namespace {

constexpr std::string_view kColumns[] = {"participant_id", "group",          "task_id",     "word_count",
                                         "time_minutes",   "similarity_pct", "concreteness"};

[[noreturn]] void bad_value(std::size_t line_no, std::string_view column, std::string_view value,
                            std::string_view why) {
  throw ValueError("line " + std::to_string(line_no) + ": " + std::string(column) + " '" + std::string(value) +
                       "' " + std::string(why),
                   {{"line", line_no}, {"column", column}});
}

}  // namespace

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::word_count: return "word_count";
    case Metric::time_minutes: return "time_minutes";
    case Metric::similarity_pct: return "similarity_pct";
    case Metric::concreteness: return "concreteness";
  }
  return "";
}

Metric parse_metric(std::string_view name) {
  if (name == "word_count" || name == "words") return Metric::word_count;
  if (name == "time_minutes" || name == "time") return Metric::time_minutes;
  if (name == "similarity_pct" || name == "similarity") return Metric::similarity_pct;
  if (name == "concreteness") return Metric::concreteness;
  throw SchemaError("unknown metric '" + std::string(name) + "'", {{"metric", name}});
}

void ExperimentDataset::column(Metric m, std::vector<double>& values, std::vector<int>& groups) const {
  values.clear();
  groups.clear();
  for (const auto& r : rows) {
    std::optional<double> v;
    switch (m) {
      case Metric::word_count: v = static_cast<double>(r.word_count); break;
      case Metric::time_minutes: v = r.time_minutes; break;
      case Metric::similarity_pct: v = r.similarity_pct; break;
      case Metric::concreteness: v = r.concreteness; break;
    }
    if (!v) continue;
    values.push_back(*v);
    groups.push_back(r.group);
  }
}

ExperimentDataset parse_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line != "\r") break;
  }
  if (line.empty()) throw SchemaError("dataset is empty", {{"column", "participant_id"}});
  const auto idx = csv::header_index(csv::split_line(line), kColumns);

  ExperimentDataset data;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> f;
    try {
      f = csv::split_line(line);
    } catch (const boost::escaped_list_error&) {
      throw ValueError("line " + std::to_string(line_no) + ": malformed quoting", {{"line", line_no}});
    }
    if (f.size() < idx.size())
      throw ValueError("line " + std::to_string(line_no) + ": expected " + std::to_string(idx.size()) + " fields",
                       {{"line", line_no}});
    auto get = [&](std::string_view col) -> const std::string& { return f[idx.at(std::string(col))]; };

    DatasetRow r;
    r.participant_id = get("participant_id");
    r.task_id = get("task_id");
    if (r.participant_id.empty()) bad_value(line_no, "participant_id", "", "is empty");

    auto group = csv::to_int(get("group"));
    if (!group || *group < 1 || *group > 3) bad_value(line_no, "group", get("group"), "must be 1, 2 or 3");
    r.group = static_cast<int>(*group);

    auto wc = csv::to_int(get("word_count"));
    if (!wc || *wc < 0) bad_value(line_no, "word_count", get("word_count"), "must be a nonnegative integer");
    r.word_count = *wc;

    auto t = csv::to_double(get("time_minutes"));
    if (!t || *t < 0) bad_value(line_no, "time_minutes", get("time_minutes"), "must be a nonnegative number");
    r.time_minutes = *t;

    auto sim = csv::to_double(get("similarity_pct"));
    if (!sim || *sim < 0 || *sim > 100) bad_value(line_no, "similarity_pct", get("similarity_pct"), "must be in [0, 100]");
    r.similarity_pct = *sim;

    const auto& conc = get("concreteness");
    if (!conc.empty()) {
      auto c = csv::to_double(conc);
      if (!c || *c < 1 || *c > 5) bad_value(line_no, "concreteness", conc, "must be in [1, 5] or empty");
      r.concreteness = *c;
    }
    data.rows.push_back(std::move(r));
  }
  return data;
}

ExperimentDataset ingest_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open dataset " + path.string(), {{"path", path.string()}});
  return parse_dataset(in);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_dataset(std::ostream& out, const ExperimentDataset& data) {
  out << kDatasetHeader << '\n';
  for (const auto& r : data.rows) {
    out << csv::quote(r.participant_id) << ',' << r.group << ',' << csv::quote(r.task_id) << ',' << r.word_count
        << ',' << format_double(r.time_minutes) << ',' << format_double(r.similarity_pct) << ','
        << (r.concreteness ? format_double(*r.concreteness) : "") << '\n';
  }
}

std::string dataset_csv(const ExperimentDataset& data) {
  std::ostringstream out;
  write_dataset(out, data);
  return out.str();
}

}  // namespace archiprompt::analytics
