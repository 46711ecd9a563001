#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aesth/cli/config.hpp"
#include "aesth/eval/assessment.hpp"
#include "aesth/eval/describe.hpp"
#include "aesth/eval/perception.hpp"
#include "aesth/idcp/pipeline.hpp"
#include "aesth/ingest/audit.hpp"
#include "aesth/ingest/load.hpp"
#include "aesth/report/manifest.hpp"
#include "aesth/report/tables.hpp"

namespace aesth::cli {

enum ExitCode { kOk = 0, kUserError = 1, kEndpointError = 2 };

#ifndef AESTHKIT_DEFAULT_TEMPLATES
#define AESTHKIT_DEFAULT_TEMPLATES "data/templates.json"
#endif

struct Globals {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> transcript;
  bool replay = false;
  bool reproducible = false;
};

/// Shared state of one invocation.
class Session {
 public:
  Session(const Globals& g, std::string command, std::ostream& out, std::ostream& err)
      : globals_(g), out_(out), err_(err) {
    config_ = load_run_config(g.config);
    seed_ = g.seed ? *g.seed : config_.seed.value_or(0);
    if (g.replay && !g.transcript) throw ConfigError("--replay requires --transcript");
    if (g.transcript) store_ = client::TranscriptStore::load(*g.transcript);
    manifest_.command = std::move(command);
    manifest_.seed = seed_;
    manifest_.reproducible = g.reproducible;
  }

  const RunConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  report::RunManifest& manifest() { return manifest_; }

  std::optional<client::EndpointConfig> endpoint(const std::string& role, const std::optional<fs::path>& file) {
    auto ep = endpoint_for(config_, role, file);
    if (ep) manifest_.config["endpoints"][role] = endpoint_snapshot(*ep);
    return ep;
  }

  std::shared_ptr<client::ChatClient> client_for(const std::string& role, const std::optional<fs::path>& file,
                                                 bool required) {
    auto ep = endpoint(role, file);
    if (!ep) {
      if (required) throw ConfigError("no " + role + " endpoint: pass --" + role + " or set endpoints." + role);
      return nullptr;
    }
    return make_client(*ep, store_, globals_.replay);
  }

  void warn(const std::string& w) {
    manifest_.warnings.push_back(w);
    err_ << "warning: " << w << "\n";
  }

  void finish() {
    if (store_ && !globals_.replay) store_->save();
  }

  /// Report file: {"kind", "manifest", ...body}.
  void write_report(const fs::path& path, const std::string& kind, json body) {
    body["kind"] = kind;
    body["manifest"] = report::to_json(manifest_);
    write_text_file(path, body.dump(2) + "\n");
  }

  std::ostream& out() { return out_; }

 private:
  Globals globals_;
  RunConfig config_;
  std::uint64_t seed_ = 0;
  std::shared_ptr<client::TranscriptStore> store_;
  report::RunManifest manifest_;
  std::ostream& out_;
  std::ostream& err_;
};

inline std::string model_label(const client::EndpointConfig& ep) { return ep.model.empty() ? ep.name : ep.model; }

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct IngestArgs {
  fs::path spec, in, out;
  std::optional<fs::path> audit;
  bool strict = false;
};

inline void cmd_ingest(Session& s, const IngestArgs& a) {
  auto spec = ingest::load_adapter_spec(a.spec);
  s.manifest().add_input("spec", a.spec);
  s.manifest().add_input("dump", a.in);
  s.manifest().config["ingest"] = {{"strict", a.strict}, {"dataset_id", spec.dataset_id}};
  auto loaded = ingest::load_source(spec, a.in, a.strict ? ingest::LoadMode::strict : ingest::LoadMode::permissive);
  write_jsonl(loaded.records, a.out);
  json errors = json::array();
  for (const auto& e : loaded.errors) {
    errors.push_back({{"line", e.line}, {"message", e.message}});
    s.warn(a.in.filename().string() + ":" + std::to_string(e.line) + ": " + e.message);
  }
  json counts = json::object();
  for (const auto& [k, n] : loaded.counts) counts[std::string(to_string(k))] = n;
  auto audit = ingest::validate_corpus(loaded.records);
  s.out() << "ingested " << loaded.records.size() << " records from " << spec.dataset_id << " ("
          << loaded.errors.size() << " rows skipped, " << audit.findings() << " audit findings)\n";
  if (a.audit) s.write_report(*a.audit, "ingest", {{"counts", counts}, {"errors", errors}, {"audit", ingest::to_json(audit)}});
}

struct ConvertArgs {
  std::vector<fs::path> annotations;
  fs::path out, audit;
  std::optional<fs::path> templates, rewriter, captioner;
  bool conversation = false;
};

inline void cmd_convert(Session& s, const ConvertArgs& a) {
  const json& sec = s.config().section("idcp");
  fs::path templates = a.templates                  ? *a.templates
                       : sec.contains("templates") ? s.config().resolve(sec["templates"].get<std::string>())
                                                   : fs::path(AESTHKIT_DEFAULT_TEMPLATES);
  auto config = parse_idcp_config(s.config(), s.seed(), templates);
  if (a.templates) config.pool = idcp::load_template_pool(*a.templates);
  std::vector<SourceAnnotation> records;
  for (const auto& path : a.annotations) {
    s.manifest().add_input("annotations", path);
    auto part = read_jsonl<SourceAnnotation>(path).records;
    records.insert(records.end(), part.begin(), part.end());
  }
  s.manifest().add_input("templates", templates);
  s.manifest().config["idcp"] = sec;
  s.manifest().config["idcp"].erase("templates");
  auto rewriter = s.client_for("rewriter", a.rewriter, false);
  auto captioner = s.client_for("captioner", a.captioner, false);
  auto result = idcp::run_idcp(records, config, {captioner.get(), rewriter.get()});
  if (a.conversation) {
    std::ostringstream os;
    for (const auto& sample : result.samples) os << idcp::to_conversation(sample).dump() << '\n';
    write_text_file(a.out, os.str());
  } else {
    write_jsonl(result.samples, a.out);
  }
  for (const auto& f : result.audit.failed_jobs) s.warn("rewrite job " + f.id + " failed: " + f.error);
  s.write_report(a.audit, "conversion", {{"audit", idcp::to_json(result.audit)}});
  s.out() << "generated " << result.samples.size() << " samples (" << result.audit.attributes.generated
          << " attribute, " << result.audit.comments.generated << " comment; " << result.audit.failed_jobs.size()
          << " failed rewrite jobs)\n";
}

struct PerceptionArgs {
  fs::path items, out;
  std::optional<fs::path> endpoint, matcher, table;
  std::optional<std::string> policy;
};

inline void cmd_perception(Session& s, const PerceptionArgs& a) {
  const json& sec = s.config().section("perception");
  auto policy = eval::parse_policy(a.policy ? *a.policy : sec.value("policy", std::string("all")));
  std::string image_token = sec.value("image_token", std::string(eval::kDefaultImageToken));
  s.manifest().config["perception"] = {{"policy", eval::to_string(policy)}, {"image_token", image_token}};
  s.manifest().add_input("items", a.items);
  auto items = read_jsonl<PerceptionItem>(a.items).records;
  auto ep = s.endpoint("candidate", a.endpoint);
  if (!ep) throw ConfigError("no candidate endpoint: pass --endpoint or set endpoints.candidate");
  auto candidate = s.client_for("candidate", a.endpoint, true);
  auto matcher = s.client_for("matcher", a.matcher, false);
  auto run = eval::eval_perception(items, *candidate, matcher.get(), ep->parallel_limit, image_token);
  for (const auto& w : run.warnings) s.warn(w);
  auto rep = eval::aggregate(run.verdicts, items, policy);
  auto baseline = eval::random_baseline(items);
  std::string table = report::render_perception_table(
      std::vector<report::PerceptionRow>{{"Random guess", baseline}, {model_label(*ep), rep}});
  json verdicts = json::array();
  for (const auto& v : run.verdicts) verdicts.push_back(eval::to_json(v));
  s.write_report(a.out, "perception",
                 {{"model", model_label(*ep)},
                  {"report", eval::to_json(rep)},
                  {"baseline", eval::to_json(baseline)},
                  {"verdicts", verdicts},
                  {"table", table}});
  if (a.table) write_text_file(*a.table, table);
  s.out() << table;
}

struct AssessmentArgs {
  fs::path items, out;
  std::optional<fs::path> endpoint;
  std::optional<std::string> mode, dataset;
};

inline void cmd_assessment(Session& s, const AssessmentArgs& a) {
  const json& sec = s.config().section("assessment");
  auto mode = eval::parse_assessment_mode(a.mode ? *a.mode : sec.value("mode", std::string("logits")));
  std::string dataset = a.dataset ? *a.dataset : sec.value("dataset", a.items.stem().string());
  s.manifest().config["assessment"] = {{"mode", eval::to_string(mode)}, {"dataset", dataset}};
  s.manifest().add_input("items", a.items);
  auto items = read_jsonl<AssessmentItem>(a.items).records;
  auto ep = s.endpoint("candidate", a.endpoint);
  if (!ep) throw ConfigError("no candidate endpoint: pass --endpoint or set endpoints.candidate");
  auto candidate = s.client_for("candidate", a.endpoint, true);
  auto rep = eval::eval_assessment(items, *candidate, mode, ep->parallel_limit);
  for (const auto& w : rep.warnings) s.warn(w);
  std::string table = report::render_assessment_table(model_label(*ep), {{dataset, rep.correlation, std::nullopt}});
  s.write_report(a.out, "assessment",
                 {{"model", model_label(*ep)}, {"dataset", dataset}, {"report", eval::to_json(rep)}, {"table", table}});
  s.out() << table;
}

struct DescribeArgs {
  fs::path items, out;
  std::optional<fs::path> endpoint, judge;
  std::optional<int> rounds;
};

inline void cmd_describe(Session& s, const DescribeArgs& a) {
  const json& sec = s.config().section("describe");
  eval::JudgeOptions opts;
  opts.rounds = a.rounds ? *a.rounds : sec.value("rounds", 5);
  if (sec.contains("temperature") && !sec["temperature"].is_null()) opts.temperature = sec["temperature"].get<double>();
  if (opts.rounds < 1) throw ConfigError("--rounds must be >= 1");
  s.manifest().config["describe"] = {{"rounds", opts.rounds},
                                     {"temperature", opts.temperature ? json(*opts.temperature) : json()}};
  s.manifest().add_input("items", a.items);
  auto items = read_jsonl<DescribeItem>(a.items).records;
  auto ep = s.endpoint("candidate", a.endpoint);
  if (!ep) throw ConfigError("no candidate endpoint: pass --endpoint or set endpoints.candidate");
  auto candidate = s.client_for("candidate", a.endpoint, true);
  auto judge_ep = s.endpoint("judge", a.judge);
  auto judge = s.client_for("judge", a.judge, true);
  auto rep = eval::eval_describe(items, *candidate, *judge, opts, ep->parallel_limit);
  for (const auto& w : rep.warnings) s.warn(w);
  std::string table = report::render_describe_table(model_label(*ep), rep);
  s.write_report(a.out, "describe",
                 {{"model", model_label(*ep)},
                  {"judge", judge_ep ? model_label(*judge_ep) : std::string("judge")},
                  {"report", eval::to_json(rep)},
                  {"table", table}});
  s.out() << table;
}

struct ReportArgs {
  std::vector<fs::path> in;
  std::optional<fs::path> out;
};

/// Re-renders saved reports; assessment reports of one model become one
/// row with a column per dataset.
inline void cmd_report(Session& s, const ReportArgs& a) {
  std::vector<report::PerceptionRow> perception;
  std::map<std::string, std::vector<report::AssessmentColumn>> assessment;
  std::string text;
  std::string describe;
  for (const auto& path : a.in) {
    json j = read_json_file(path);
    std::string kind = j.value("kind", std::string());
    std::string model = j.value("model", path.stem().string());
    try {
      if (kind == "perception") {
        if (perception.empty()) perception.push_back({"Random guess", eval::perception_report_from_json(j.at("baseline"))});
        perception.push_back({model, eval::perception_report_from_json(j.at("report"))});
      } else if (kind == "assessment") {
        const json& c = j.at("report").at("correlation");
        eval::CorrelationResult r;
        r.n = c.at("n").get<std::size_t>();
        r.degenerate = c.at("degenerate").get<bool>();
        if (!r.degenerate) {
          r.plcc = c.at("plcc").get<double>();
          r.srcc = c.at("srcc").get<double>();
        }
        assessment[model].push_back({j.value("dataset", path.stem().string()), r, std::nullopt});
      } else if (kind == "describe") {
        describe += j.at("table").get<std::string>();
      } else {
        throw InputError(path.string() + ": not an evaluation report");
      }
    } catch (const json::exception& e) {
      throw InputError(path.string() + ": " + e.what());
    }
  }
  if (!perception.empty()) text += report::render_perception_table(perception) + "\n";
  for (const auto& [model, cols] : assessment) text += report::render_assessment_table(model, cols) + "\n";
  if (!describe.empty()) text += describe + "\n";
  if (a.out) write_text_file(*a.out, text);
  s.out() << text;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"aesthkit: aesthetics instruction-data conversion and MLLM benchmarking"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "run configuration (JSON)");
  app.add_option("--seed", g.seed, "seed for sampling and template choice");
  app.add_option("--transcript", g.transcript, "record/replay file for endpoint traffic");
  app.add_flag("--replay", g.replay, "serve every request from --transcript; no network");
  app.add_flag("--reproducible", g.reproducible, "write zero timing fields so reruns are byte-identical");

  std::function<void(Session&)> action;
  std::string command;

  auto* convert = app.add_subcommand("convert", "dataset conversion");
  convert->require_subcommand(1);
  IngestArgs ing;
  auto* ingest_cmd = convert->add_subcommand("ingest", "parse a native dump into annotations JSONL");
  ingest_cmd->add_option("--spec", ing.spec, "adapter mapping file")->required();
  ingest_cmd->add_option("--in", ing.in, "native dump")->required();
  ingest_cmd->add_option("--out", ing.out, "annotations JSONL")->required();
  ingest_cmd->add_option("--audit", ing.audit, "write audit JSON here");
  ingest_cmd->add_flag("--strict", ing.strict, "fail on the first bad row");
  ingest_cmd->callback([&] {
    command = "convert ingest";
    action = [&](Session& s) { cmd_ingest(s, ing); };
  });

  ConvertArgs conv;
  auto* run_cmd = convert->add_subcommand("run", "filter, balance and generate instruction samples");
  run_cmd->add_option("--annotations", conv.annotations, "annotations JSONL, one or more")->required()->expected(1, -1);
  run_cmd->add_option("--out", conv.out, "instruction samples JSONL")->required();
  run_cmd->add_option("--audit", conv.audit, "conversion audit JSON")->required();
  run_cmd->add_option("--templates", conv.templates, "template pool JSON");
  run_cmd->add_option("--rewriter", conv.rewriter, "rewriter endpoint JSON");
  run_cmd->add_option("--captioner", conv.captioner, "captioner endpoint JSON");
  run_cmd->add_flag("--conversation", conv.conversation, "emit the two-turn conversational layout");
  run_cmd->callback([&] {
    command = "convert run";
    action = [&](Session& s) { cmd_convert(s, conv); };
  });

  auto* ev = app.add_subcommand("eval", "benchmark a model endpoint");
  ev->require_subcommand(1);
  PerceptionArgs per;
  auto* per_cmd = ev->add_subcommand("perception", "multiple-choice attribute questions");
  per_cmd->add_option("--items", per.items, "PerceptionItem JSONL")->required();
  per_cmd->add_option("--endpoint", per.endpoint, "candidate endpoint JSON");
  per_cmd->add_option("--matcher", per.matcher, "fallback matcher endpoint JSON");
  per_cmd->add_option("--out", per.out, "report JSON")->required();
  per_cmd->add_option("--policy", per.policy, "all | answered")->check(CLI::IsMember({"all", "answered", "all_items", "answered_only"}));
  per_cmd->add_option("--table", per.table, "also write the text table here");
  per_cmd->callback([&] {
    command = "eval perception";
    action = [&](Session& s) { cmd_perception(s, per); };
  });

  AssessmentArgs as;
  auto* as_cmd = ev->add_subcommand("assessment", "zero-shot scoring against MOS");
  as_cmd->add_option("--items", as.items, "AssessmentItem JSONL")->required();
  as_cmd->add_option("--endpoint", as.endpoint, "candidate endpoint JSON");
  as_cmd->add_option("--mode", as.mode, "logits | text")->check(CLI::IsMember({"logits", "text"}));
  as_cmd->add_option("--dataset", as.dataset, "dataset column label");
  as_cmd->add_option("--out", as.out, "report JSON")->required();
  as_cmd->callback([&] {
    command = "eval assessment";
    action = [&](Session& s) { cmd_assessment(s, as); };
  });

  DescribeArgs ds;
  auto* ds_cmd = ev->add_subcommand("describe", "judge-scored free-text critique");
  ds_cmd->add_option("--items", ds.items, "DescribeItem JSONL")->required();
  ds_cmd->add_option("--endpoint", ds.endpoint, "candidate endpoint JSON");
  ds_cmd->add_option("--judge", ds.judge, "judge endpoint JSON");
  ds_cmd->add_option("--rounds", ds.rounds, "judge rounds per dimension");
  ds_cmd->add_option("--out", ds.out, "report JSON")->required();
  ds_cmd->callback([&] {
    command = "eval describe";
    action = [&](Session& s) { cmd_describe(s, ds); };
  });

  ReportArgs rp;
  auto* rp_cmd = app.add_subcommand("report", "render saved reports as tables");
  rp_cmd->add_option("--in", rp.in, "report JSON files")->required()->expected(1, -1);
  rp_cmd->add_option("--out", rp.out, "write tables here");
  rp_cmd->callback([&] {
    command = "report";
    action = [&](Session& s) { cmd_report(s, rp); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUserError;
  }

  std::optional<fs::path> partial_out;
  if (command.rfind("eval ", 0) == 0) partial_out = command == "eval perception"  ? per.out
                                                    : command == "eval assessment" ? as.out
                                                                                   : ds.out;
  if (command == "convert run") partial_out = conv.audit;

  std::unique_ptr<Session> session;
  try {
    session = std::make_unique<Session>(g, command, out, err);
    action(*session);
    session->finish();
    return kOk;
  } catch (const EndpointError& e) {
    err << "error: " << e.what() << "\n";
    if (session) {
      session->finish();
      session->manifest().status = "partial";
      session->manifest().error = e.what();
      if (partial_out) {
        try {
          session->write_report(*partial_out, "partial", json::object());
        } catch (const Error& io) {
          err << "error: could not write partial manifest: " << io.what() << "\n";
        }
      }
    }
    return kEndpointError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUserError;
  }
}

}  // namespace aesth::cli
