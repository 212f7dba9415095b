#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "archiprompt/service.hpp"

namespace archiprompt::service {
namespace {

struct RuntimeOptions {
  ServiceConfig config = default_config();
  bool force_mock = false;

  void add(CLI::App* app) {
    app->add_option("--curriculum", config.curriculum_path, "Curriculum YAML file");
    app->add_option("--lexicon", config.lexicon_path, "Concreteness lexicon (TSV)");
    app->add_option("--personas", config.personas_path, "Persona YAML file");
    app->add_option("--data-dir", config.data_dir, "Directory holding session logs");
    app->add_flag("--mock", force_mock, "Use the offline mock client");
    app->add_option("--provider-url", config.remote.provider_url, "Remote generation endpoint");
    app->add_option("--model-id", config.remote.model_id, "Remote model identifier");
    app->add_option("--credential-env", config.remote.credential_env, "Environment variable holding the API key");
    app->add_option("--timeout-ms", config.remote.timeout_ms, "Remote request timeout")->check(CLI::PositiveNumber);
  }

  ServiceConfig resolved() const {
    ServiceConfig c = config;
    c.mock = force_mock || c.remote.provider_url.empty();
    return c;
  }
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string(), {{"path", path.string()}});
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string one_line(std::string text) {
  for (auto& c : text)
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  auto b = text.find_first_not_of(' ');
  if (b == std::string::npos) return "";
  return text.substr(b, text.find_last_not_of(' ') - b + 1);
}

analytics::ExperimentDataset dataset_from(const std::string& file, const RuntimeOptions& rt) {
  if (!file.empty()) return analytics::ingest_dataset(file);
  Runtime runtime(rt.resolved());
  return export_dataset(runtime.engine(), load_sessions(runtime.engine(), runtime.config().data_dir));
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path, {{"path", path}});
  out << j.dump(2) << '\n';
}

int validate_curriculum_file(const std::filesystem::path& path, std::ostream& out) {
  curriculum::Curriculum c;
  try {
    c = curriculum::load_curriculum(path);
  } catch (const curriculum::ParseError& e) {
    out << path.string() << ": parse: " << e.what() << '\n';
    return 1;
  } catch (const curriculum::MissingField& e) {
    out << path.string() << ": missing_field: " << e.what() << '\n';
    return 1;
  }
  const auto violations = curriculum::validate_curriculum(c);
  for (const auto& v : violations) out << path.string() << ": " << v.subject << ": " << v.rule << ": " << v.message << '\n';
  if (!violations.empty()) return 1;
  out << "ok: " << c.modules.size() << " modules, " << c.tasks.size() << " tasks (version " << c.version << ")\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompt-writing tutor and experiment statistics for architectural text-to-image work",
               "archiprompt"};
  app.require_subcommand(1);

  RuntimeOptions rt;
  bool json = false;
  std::string json_out;

  // tutor run
  auto* tutor = app.add_subcommand("tutor", "Interactive tutoring session");
  tutor->require_subcommand(1);
  auto* tutor_run = tutor->add_subcommand("run", "Run one session on the terminal");
  TutorOptions topts;
  std::string group = "group1";
  std::string session_id;
  tutor_run->add_option("--participant", topts.participant_id, "Participant id");
  tutor_run->add_option("--group", group, "group1 (guide + personas), group2 (guide only) or group3 (control)");
  tutor_run->add_option("--session-id", session_id, "Session id (random when omitted)");
  rt.add(tutor_run);

  // eval prompt
  auto* eval = app.add_subcommand("eval", "One-shot prompt evaluation");
  eval->require_subcommand(1);
  auto* eval_prompt = eval->add_subcommand("prompt", "Score a candidate prompt against a reference");
  std::filesystem::path reference;
  std::vector<std::string> candidate_words;
  eval_prompt->add_option("--reference", reference, "File holding the reference prompt")->required();
  eval_prompt->add_option("candidate", candidate_words, "Candidate prompt (read from stdin when omitted)");
  eval_prompt->add_option("--lexicon", rt.config.lexicon_path, "Concreteness lexicon (TSV)");

  // curriculum validate
  auto* cur = app.add_subcommand("curriculum", "Curriculum tools");
  cur->require_subcommand(1);
  auto* cur_validate = cur->add_subcommand("validate", "Check a curriculum file");
  std::filesystem::path curriculum_file = rt.config.curriculum_path;
  cur_validate->add_option("file", curriculum_file, "Curriculum YAML file");

  // personas list
  auto* pers = app.add_subcommand("personas", "Persona tools");
  pers->require_subcommand(1);
  auto* pers_list = pers->add_subcommand("list", "List configured personas");
  pers_list->add_option("--personas", rt.config.personas_path, "Persona YAML file");
  pers_list->add_flag("--json", json, "Structured output");

  // stats anova|tukey|corr
  auto* stats = app.add_subcommand("stats", "Experiment statistics");
  stats->require_subcommand(1);
  std::string dataset_file;
  std::string metric = "similarity_pct";
  double alpha = 0.05;
  int corr_group = 0;
  auto add_stats = [&](CLI::App* sub) {
    sub->add_option("dataset", dataset_file, "Dataset CSV (recorded sessions when omitted)");
    sub->add_option("--data-dir", rt.config.data_dir, "Directory holding session logs");
    sub->add_flag("--json", json, "Print JSON instead of a table");
    sub->add_option("--json-out", json_out, "Also write the JSON report to this file");
  };
  auto* st_anova = stats->add_subcommand("anova", "One-way ANOVA across groups");
  st_anova->add_option("--metric", metric, "time_minutes, word_count, similarity_pct or concreteness");
  add_stats(st_anova);
  auto* st_tukey = stats->add_subcommand("tukey", "Tukey HSD pairwise comparisons");
  st_tukey->add_option("--metric", metric, "time_minutes, word_count, similarity_pct or concreteness");
  st_tukey->add_option("--alpha", alpha, "Family-wise significance level")->check(CLI::Range(1e-9, 0.5));
  add_stats(st_tukey);
  auto* st_corr = stats->add_subcommand("corr", "Pearson correlation matrix");
  st_corr->add_option("--group", corr_group, "Restrict to one group")->check(CLI::Range(1, 3));
  add_stats(st_corr);

  // survey summarize
  auto* survey = app.add_subcommand("survey", "Survey tools");
  survey->require_subcommand(1);
  auto* survey_sum = survey->add_subcommand("summarize", "Level counts and medians per question and group");
  std::filesystem::path survey_file;
  survey_sum->add_option("file", survey_file, "Survey CSV")->required();
  survey_sum->add_flag("--json", json, "Print JSON instead of a table");
  survey_sum->add_option("--json-out", json_out, "Also write the JSON report to this file");

  // export dataset
  auto* exp = app.add_subcommand("export", "Exports");
  exp->require_subcommand(1);
  auto* exp_dataset = exp->add_subcommand("dataset", "Session logs to the analytics CSV");
  std::string export_out;
  exp_dataset->add_option("--out", export_out, "Output file (stdout when omitted)");
  rt.add(exp_dataset);

  // serve
  auto* srv = app.add_subcommand("serve", "Run the HTTP API");
  srv->add_option("--host", rt.config.host, "Bind address");
  srv->add_option("--port", rt.config.port, "Port")->check(CLI::Range(0, 65535));
  rt.add(srv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (tutor_run->parsed()) {
      topts.condition = session::parse_condition(group);
      if (!session_id.empty()) topts.session_id = session_id;
      Runtime runtime(rt.resolved());
      SessionStore store(runtime.engine(), runtime.config().data_dir);
      int code = run_tutor(store, topts, in, out);
      if (code != 0) err << "input ended before the session was completed\n";
      return code;
    }

    if (eval_prompt->parsed()) {
      const auto ref = one_line(read_file(reference));
      std::string candidate;
      if (candidate_words.empty()) {
        std::ostringstream s;
        s << in.rdbuf();
        candidate = one_line(s.str());
      } else {
        for (const auto& w : candidate_words) candidate += (candidate.empty() ? "" : " ") + w;
      }
      const auto lexicon = metrics::load_lexicon(rt.config.lexicon_path).lexicon;
      out << nlohmann::json(metrics::evaluate(candidate, ref, lexicon)).dump(2) << '\n';
      return 0;
    }

    if (cur_validate->parsed()) return validate_curriculum_file(curriculum_file, out);

    if (pers_list->parsed()) {
      const auto registry = personas::PersonaRegistry::load(rt.config.personas_path);
      if (json) {
        auto arr = nlohmann::json::array();
        for (const auto& p : registry.list())
          arr.push_back({{"role_id", p.role_id}, {"display_name", p.display_name}, {"description", p.description}});
        out << arr.dump(2) << '\n';
      } else {
        for (const auto& p : registry.list()) out << p.role_id << '\t' << p.display_name << '\n';
      }
      return 0;
    }

    if (st_anova->parsed() || st_tukey->parsed() || st_corr->parsed()) {
      const auto data = dataset_from(dataset_file, rt);
      nlohmann::json report;
      std::string text;
      if (st_anova->parsed()) {
        const auto m = analytics::parse_metric(metric);
        const auto t = analytics::anova_oneway(data, m);
        report = analytics::to_json(t);
        report["metric"] = analytics::to_string(m);
        text = analytics::anova_text(t);
      } else if (st_tukey->parsed()) {
        const auto m = analytics::parse_metric(metric);
        const auto rows = analytics::tukey_hsd(data, m, alpha);
        report = {{"metric", analytics::to_string(m)}, {"alpha", alpha}, {"comparisons", analytics::to_json(rows)}};
        text = analytics::tukey_text(rows);
      } else {
        std::optional<int> g;
        if (corr_group) g = corr_group;
        const auto mat = analytics::pearson_matrix(data, analytics::kAllMetrics, g);
        report = analytics::to_json(mat);
        if (g) report["group"] = *g;
        text = analytics::correlation_text(mat);
      }
      out << (json ? report.dump(2) + "\n" : text);
      if (!json_out.empty()) write_json_file(json_out, report);
      return 0;
    }

    if (survey_sum->parsed()) {
      const auto responses = analytics::ingest_survey(survey_file);
      const auto summary = analytics::survey_summary(responses);
      const auto report = analytics::to_json(summary);
      out << (json ? report.dump(2) + "\n" : analytics::survey_text(summary));
      if (!json_out.empty()) write_json_file(json_out, report);
      return 0;
    }

    if (exp_dataset->parsed()) {
      Runtime runtime(rt.resolved());
      const auto data = export_dataset(runtime.engine(), load_sessions(runtime.engine(), runtime.config().data_dir));
      if (export_out.empty()) {
        analytics::write_dataset(out, data);
      } else {
        std::ofstream f(export_out);
        if (!f) throw ConfigError("cannot write " + export_out, {{"path", export_out}});
        analytics::write_dataset(f, data);
        err << "wrote " << data.rows.size() << " rows to " << export_out << '\n';
      }
      return 0;
    }

    if (srv->parsed()) return serve(rt.resolved(), err);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace archiprompt::service
