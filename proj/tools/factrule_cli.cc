// Copyright 2026 The factrule Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: dataset generation, training, evaluation, rule
// export, explanations, the HTTP service and gradient checking.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "factrule/errors.h"
#include "factrule/explain.h"
#include "factrule/gradcheck.h"
#include "factrule/io.h"
#include "factrule/metrics.h"
#include "factrule/rules.h"
#include "factrule/scenario.h"
#include "factrule/service.h"
#include "factrule/split.h"
#include "factrule/trainer.h"
#include "httplib.h"

namespace factrule {
namespace {

// Exit codes (also listed in the README).
enum ExitCode {
  kOk = 0,
  kCheckFailed = 1,  // gradcheck mismatch
  kUsage = 2,        // bad command line
  kConfig = 3,       // invalid configuration or inconsistent inputs
  kFormat = 4,       // unreadable or malformed file
  kNumerical = 5,    // training diverged
  kService = 6,      // server could not bind
  kInternal = 70,
};

void PrintError(const std::string& kind, const std::string& message) {
  const Json body = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << body.dump() << std::endl;
}

// Resolves a config path; relative paths that do not exist are looked up in
// $FACTRULE_CONFIG_DIR.
std::string ResolveConfig(const std::string& path) {
  namespace fs = std::filesystem;
  if (path.empty() || fs::exists(path) || fs::path(path).is_absolute()) {
    return path;
  }
  if (const char* dir = std::getenv("FACTRULE_CONFIG_DIR")) {
    const fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

Json LoadConfigDocument(const std::string& path) {
  if (path.empty()) return Json::object();
  const std::string resolved = ResolveConfig(path);
  return ParseJson(ReadTextFile(resolved), resolved);
}

void WriteOrPrint(const std::string& out, const Json& doc) {
  if (out.empty() || out == "-") {
    std::cout << doc.dump(2) << std::endl;
  } else {
    WriteTextFile(out, doc.dump(2) + "\n");
  }
}

// Train/validation partition when no explicit validation set is given: the
// last `fraction` of the samples.
std::pair<std::vector<Scenario>, std::vector<Scenario>> HoldBack(
    const std::vector<Scenario>& samples, double fraction) {
  const auto cut = samples.size() -
                   static_cast<std::size_t>(fraction * samples.size());
  return {{samples.begin(), samples.begin() + cut},
          {samples.begin() + cut, samples.end()}};
}

struct GenerateArgs {
  std::string config, out;
  std::size_t count = 5000;
  std::optional<std::uint64_t> seed;
  std::uint64_t first_id = 0;
};

int RunGenerate(const GenerateArgs& a) {
  const Json doc = LoadConfigDocument(a.config);
  GeneratorConfig config = GeneratorConfigFromJson(
      doc.contains("generator") ? doc.at("generator") : doc);
  if (a.seed) config.seed = *a.seed;
  if (a.count == 0) throw ConfigError("--count must be at least 1");
  const Dataset d = GenerateDataset(config, a.count, a.first_id);
  WriteDataset(a.out, d);
  const DatasetManifest m = BuildManifest(d.config, d.samples);
  std::cout << Json({{"out", a.out},
                     {"count", m.count},
                     {"config_hash", m.config_hash},
                     {"class_histogram", m.class_histogram}})
                   .dump()
            << std::endl;
  return kOk;
}

struct TrainArgs {
  std::string data, val, config, out, history, holdout;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  bool quiet = false;
};

int RunTrain(const TrainArgs& a) {
  const Json doc = LoadConfigDocument(a.config);
  TrainConfig tc =
      TrainConfigFromJson(doc.contains("training") ? doc.at("training") : doc);
  if (a.seed) tc.seed = *a.seed;
  if (a.epochs) tc.epochs = *a.epochs;
  tc.Validate();
  ModelConfig mc = ModelHyperFromJson(doc.contains("model") ? doc.at("model")
                                                            : Json::object());

  const Dataset data = ReadDataset(a.data);
  std::vector<Scenario> train, val;
  if (!a.val.empty()) {
    const Dataset v = ReadDataset(a.val);
    if (!(v.config.vocabulary == data.config.vocabulary)) {
      throw ConfigError("validation data uses a different vocabulary");
    }
    train = data.samples;
    val = v.samples;
  } else {
    std::tie(train, val) = HoldBack(data.samples, 0.2);
  }
  if (!a.holdout.empty()) {
    const auto patterns = ParseHoldout(a.holdout, data.config.vocabulary);
    const auto split = SplitCompositional(train, patterns,
                                          data.config.classes.size());
    std::vector<Scenario> kept;
    for (auto i : split.train) kept.push_back(train[i]);
    train = std::move(kept);
  }

  LogicModel model = MakeModel(data.config, mc, tc.seed, tc.init);
  std::string history_lines;
  const auto history =
      Train(model, train, val, tc, [&](const EpochRecord& r) {
        const std::string line = ToJson(r).dump();
        history_lines += line + "\n";
        if (!a.quiet) std::cerr << line << std::endl;
      });
  if (!a.history.empty()) WriteTextFile(a.history, history_lines);

  std::optional<RuleSet> rules;
  if (!val.empty()) {
    rules = ExtractRules(model, ValidationPoints(model, val), tc.rules);
  }
  SaveCheckpoint(a.out, CheckpointToJson(model, &tc, ConfigHash(data.config),
                                         history, rules ? &*rules : nullptr));
  Json summary = {{"checkpoint", a.out}, {"epochs", history.size()}};
  if (!history.empty()) summary["final"] = ToJson(history.back());
  std::cout << summary.dump() << std::endl;
  return kOk;
}

struct EvalArgs {
  std::string ckpt, data, compositional, train_data, out;
  bool no_cf = false;
  std::size_t cf_limit = 0;
};

int RunEval(const EvalArgs& a) {
  const Checkpoint ck = LoadCheckpoint(a.ckpt);
  const Dataset data = ReadDataset(a.data);
  if (!(data.config.vocabulary == ck.model.config().vocabulary)) {
    throw ConfigError("dataset vocabulary does not match the checkpoint");
  }
  std::vector<Scenario> in_dist = data.samples, comp;
  std::set<std::string> train_patterns;
  EvalOptions opts;
  opts.counterfactual = !a.no_cf;
  opts.counterfactual_limit = a.cf_limit;
  if (!a.compositional.empty()) {
    const auto patterns = ParseHoldout(a.compositional, data.config.vocabulary);
    const auto split = SplitCompositional(data.samples, patterns,
                                          data.config.classes.size());
    in_dist.clear();
    for (auto i : split.train) in_dist.push_back(data.samples[i]);
    for (auto i : split.test) comp.push_back(data.samples[i]);
    if (!a.train_data.empty()) {
      train_patterns = PatternSet(ReadDataset(a.train_data).samples);
    } else {
      train_patterns = PatternSet(in_dist);
    }
    opts.compositional = comp;
    opts.train_patterns = &train_patterns;
  }
  const MetricsReport report = Evaluate(ck.model, in_dist, opts);
  WriteOrPrint(a.out, ToJson(report, ck.model.config().classes));
  return kOk;
}

struct RulesArgs {
  std::string ckpt, data, out;
  std::optional<double> tau_prune, rho_min, min_weight;
};

int RunRules(const RulesArgs& a) {
  const Checkpoint ck = LoadCheckpoint(a.ckpt);
  const ModelConfig& mc = ck.model.config();
  ExtractOptions opts = ck.train ? ck.train->rules : ExtractOptions{};
  if (a.tau_prune) opts.tau_prune = *a.tau_prune;
  if (a.rho_min) opts.prune.rho_min = *a.rho_min;
  if (a.min_weight) opts.prune.min_weight = *a.min_weight;
  RuleSet rules;
  if (!a.data.empty()) {
    const Dataset data = ReadDataset(a.data);
    if (!(data.config.vocabulary == mc.vocabulary)) {
      throw ConfigError("dataset vocabulary does not match the checkpoint");
    }
    rules = ExtractRules(ck.model, ValidationPoints(ck.model, data.samples),
                         opts);
  } else if (ck.rules && !a.tau_prune && !a.rho_min && !a.min_weight) {
    rules = *ck.rules;
  } else {
    throw ConfigError(
        "--data is required to estimate rule reliability with new thresholds");
  }
  WriteOrPrint(a.out, ToJson(rules, mc.vocabulary, mc.classes));
  if (!a.out.empty() && a.out != "-") {
    for (const auto& r : rules.rules) {
      std::cerr << Render(r, mc.vocabulary, mc.classes) << "\n";
    }
  }
  return kOk;
}

struct ExplainArgs {
  std::string ckpt, sample, rules;
  bool exact_cf = false;
  int budget_ms = 2000;
};

int RunExplain(const ExplainArgs& a) {
  const Checkpoint ck = LoadCheckpoint(a.ckpt);
  const ModelConfig& mc = ck.model.config();
  RuleSet rules;
  if (!a.rules.empty()) {
    rules = RuleSetFromJson(ParseJson(ReadTextFile(a.rules), a.rules),
                            mc.vocabulary, mc.classes);
  } else if (ck.rules) {
    rules = *ck.rules;
  }
  const Json sample = ParseJson(ReadTextFile(a.sample), a.sample);
  FactGraph graph;
  if (sample.contains("facts") && !sample.contains("views")) {
    graph = FactGraphFromConfidences(
        ConfidencesFromJson(sample.at("facts"), mc.vocabulary));
  } else if (sample.contains("views")) {
    graph = BuildFactGraph(
        ViewsFromJson(sample.at("views"), ck.model.num_facts(),
                      mc.feature_dim),
        ck.model.heads(), mc.fusion);
  } else {
    throw FormatError("sample must contain 'facts' or 'views'");
  }
  const Reasoner reasoner(ck.model);
  ExplainOptions opts;
  opts.exact_counterfactual = a.exact_cf;
  opts.budget = std::chrono::milliseconds(a.budget_ms);
  const ExplanationPayload p = Explain(reasoner, std::move(graph), rules, opts);
  std::cout << ToJson(p, mc.vocabulary, mc.classes).dump(2) << std::endl;
  return kOk;
}

struct ServeArgs {
  std::string ckpt, rules, host = "127.0.0.1";
  int port = 8080;
  int budget_ms = 2000;
};

httplib::Server* g_server = nullptr;

void StopServer(int) {
  if (g_server) g_server->stop();
}

int RunServe(const ServeArgs& a) {
  Checkpoint ck = LoadCheckpoint(a.ckpt);
  const ModelConfig mc = ck.model.config();
  RuleSet rules;
  if (!a.rules.empty()) {
    rules = RuleSetFromJson(ParseJson(ReadTextFile(a.rules), a.rules),
                            mc.vocabulary, mc.classes);
  } else if (ck.rules) {
    rules = *ck.rules;
  }
  ServiceOptions opts;
  opts.search_budget = std::chrono::milliseconds(a.budget_ms);
  const ExplanationService service(std::move(ck.model), std::move(rules), opts);
  httplib::Server server;
  g_server = &server;
  std::signal(SIGINT, StopServer);
  std::signal(SIGTERM, StopServer);
  int bound = 0;
  service.Mount(server);
  if (a.port == 0) {
    bound = server.bind_to_any_port(a.host);
  } else {
    bound = server.bind_to_port(a.host, a.port) ? a.port : -1;
  }
  if (bound < 0) {
    PrintError("service", "cannot bind " + a.host + ":" +
                              std::to_string(a.port));
    return kService;
  }
  std::cerr << Json({{"listening", a.host + ":" + std::to_string(bound)}}).dump()
            << std::endl;
  server.listen_after_bind();
  g_server = nullptr;
  return kOk;
}

struct GradcheckArgs {
  std::uint64_t seed = 1;
  std::size_t configs = 100;
  double h = 1e-5;
  double tol = 1e-4;
};

int RunGradcheck(const GradcheckArgs& a) {
  double worst = 0.0;
  std::size_t failures = 0;
  Json failed = Json::array();
  for (std::size_t i = 0; i < a.configs; ++i) {
    GradCheckProblem p = RandomGradCheckProblem(a.seed + i);
    const auto batch = p.Batch();
    const GradCheckReport r =
        FiniteDiffCheck(p.model, batch, p.loss, p.step, a.h, a.tol);
    worst = std::max(worst, r.worst());
    if (!r.passed) {
      ++failures;
      for (const auto& g : r.groups) {
        if (!g.passed) {
          failed.push_back({{"config_seed", a.seed + i},
                            {"group", g.group},
                            {"relative_error", g.relative_error}});
        }
      }
    }
  }
  std::cout << Json({{"configs", a.configs},
                     {"failures", failures},
                     {"worst_relative_error", worst},
                     {"tolerance", a.tol},
                     {"failed_groups", failed}})
                   .dump(2)
            << std::endl;
  return failures ? kCheckFailed : kOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"Neuro-symbolic rule learning over fused multi-view facts"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic dataset");
  g->add_option("--config", gen.config,
                "Generator config JSON (default: reference scenario)");
  g->add_option("--count", gen.count, "Number of samples")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--seed", gen.seed, "Override the config seed");
  g->add_option("--first-id", gen.first_id, "Index of the first sample");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model on a dataset");
  t->add_option("--data", tr.data, "Dataset directory")->required();
  t->add_option("--val", tr.val,
                "Validation dataset (default: last 20% of --data)");
  t->add_option("--config", tr.config, "Training config JSON");
  t->add_option("--seed", tr.seed, "Training seed");
  t->add_option("--epochs", tr.epochs, "Override the epoch count");
  t->add_option("--out", tr.out, "Checkpoint path")->required();
  t->add_option("--history", tr.history, "Per-epoch history (JSON lines)");
  t->add_option("--holdout", tr.holdout,
                "Drop training samples matching these patterns");
  t->add_flag("--quiet", tr.quiet, "Do not echo history to stderr");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint");
  e->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  e->add_option("--data", ev.data, "Dataset directory")->required();
  e->add_option("--compositional", ev.compositional,
                "Held-out patterns, e.g. a=1,b=1;c=0");
  e->add_option("--train-data", ev.train_data,
                "Training dataset (for novel-pattern rate)");
  e->add_option("--out", ev.out, "Write the report here instead of stdout");
  e->add_flag("--no-cf", ev.no_cf, "Skip counterfactual validity");
  e->add_option("--cf-limit", ev.cf_limit,
                "Check at most this many risk-predicted samples");

  RulesArgs ru;
  auto* r = app.add_subcommand("rules", "Extract and export the rule set");
  r->add_option("--ckpt", ru.ckpt, "Checkpoint")->required();
  r->add_option("--data", ru.data, "Validation data for reliability");
  r->add_option("--tau-prune", ru.tau_prune, "Literal threshold in (0,1)");
  r->add_option("--rho-min", ru.rho_min, "Minimum rule reliability");
  r->add_option("--min-weight", ru.min_weight, "Minimum class weight");
  r->add_option("--out", ru.out, "Output path (default stdout)");

  ExplainArgs ex;
  auto* x = app.add_subcommand("explain", "Explain one sample");
  x->add_option("--ckpt", ex.ckpt, "Checkpoint")->required();
  x->add_option("--sample", ex.sample,
                "JSON with 'facts' (array or object) or 'views'")
      ->required();
  x->add_option("--rules", ex.rules, "Rule set export (default: checkpoint)");
  x->add_flag("--exact-cf", ex.exact_cf, "Include the minimal counterfactual");
  x->add_option("--budget-ms", ex.budget_ms, "Exact search budget");

  ServeArgs sv;
  auto* s = app.add_subcommand("serve", "Run the HTTP explanation service");
  s->add_option("--ckpt", sv.ckpt, "Checkpoint")->required();
  s->add_option("--rules", sv.rules, "Rule set export (default: checkpoint)");
  s->add_option("--port", sv.port, "Port (0 picks a free one)");
  s->add_option("--host", sv.host, "Bind address");
  s->add_option("--budget-ms", sv.budget_ms, "Exact search budget");

  GradcheckArgs gc;
  auto* c = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  c->add_option("--seed", gc.seed, "First configuration seed");
  c->add_option("--configs", gc.configs, "Number of random configurations");
  c->add_option("--tol", gc.tol, "Relative error tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    PrintError("usage", e.what());
    return kUsage;
  }

  try {
    if (*g) return RunGenerate(gen);
    if (*t) return RunTrain(tr);
    if (*e) return RunEval(ev);
    if (*r) return RunRules(ru);
    if (*x) return RunExplain(ex);
    if (*s) return RunServe(sv);
    if (*c) return RunGradcheck(gc);
  } catch (const TrainingDiverged& err) {
    PrintError("numerical", std::string(err.what()) + "\n" + err.snapshot());
    return kNumerical;
  } catch (const NumericalError& err) {
    PrintError("numerical", err.what());
    return kNumerical;
  } catch (const FormatError& err) {
    PrintError("format", err.what());
    return kFormat;
  } catch (const VocabularyMismatch& err) {
    PrintError("config", err.what());
    return kConfig;
  } catch (const ConfigError& err) {
    PrintError("config", err.what());
    return kConfig;
  } catch (const std::exception& err) {
    PrintError("internal", err.what());
    return kInternal;
  }
  return kUsage;
}

}  // namespace
}  // namespace factrule

int main(int argc, char** argv) { return factrule::Main(argc, argv); }
