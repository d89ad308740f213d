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

#include "factrule/io.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "factrule/errors.h"

namespace factrule {

namespace {

std::string Fnv64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

template <typename T>
T Field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(where + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw FormatError(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T Optional(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw FormatError(std::string("field '") + key + "' has the wrong type");
  }
}

Json OptionalJson(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::vector<std::size_t> IdsToIndices(const Json& j,
                                      const FactVocabulary& vocabulary,
                                      const std::string& where) {
  std::vector<std::size_t> out;
  if (!j.is_array()) throw FormatError(where + ": expected an array of ids");
  for (const auto& item : j) {
    if (!item.is_string()) throw FormatError(where + ": fact id not a string");
    const auto k = vocabulary.IndexOf(item.get<std::string>());
    if (!k) {
      throw FormatError(where + ": unknown fact '" + item.get<std::string>() +
                        "'");
    }
    out.push_back(*k);
  }
  return out;
}

Json IndicesToIds(std::span<const std::size_t> indices,
                  const FactVocabulary& vocabulary) {
  Json out = Json::array();
  for (auto k : indices) out.push_back(vocabulary[k].id);
  return out;
}

std::size_t ClassIndex(const std::vector<ClassInfo>& classes,
                       const std::string& name, const std::string& where) {
  for (std::size_t y = 0; y < classes.size(); ++y) {
    if (classes[y].name == name) return y;
  }
  throw FormatError(where + ": unknown class '" + name + "'");
}

std::string SparsityName(SparsityForm f) {
  return f == SparsityForm::kEntropy ? "entropy" : "literal_l1";
}

SparsityForm SparsityFromName(const std::string& s) {
  if (s == "entropy") return SparsityForm::kEntropy;
  if (s == "literal_l1") return SparsityForm::kLiteralL1;
  throw FormatError("unknown sparsity form '" + s + "'");
}

std::string SupervisionName(Supervision s) {
  switch (s) {
    case Supervision::kFull:
      return "full";
    case Supervision::kWeak:
      return "weak";
    case Supervision::kSemi:
      return "semi";
  }
  return "full";
}

Supervision SupervisionFromName(const std::string& s) {
  if (s == "full") return Supervision::kFull;
  if (s == "weak") return Supervision::kWeak;
  if (s == "semi") return Supervision::kSemi;
  throw FormatError("unknown supervision mode '" + s + "'");
}

Json PosteriorJson(std::size_t label, std::span<const double> posterior,
                   const std::vector<ClassInfo>& classes) {
  return {{"index", label},
          {"name", classes.at(label).name},
          {"posterior", std::vector<double>(posterior.begin(), posterior.end())}};
}

}  // namespace

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << text;
  if (!out) throw FormatError("write failed for '" + path + "'");
}

Json ParseJson(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(what + ": invalid JSON (" + e.what() + ")");
  }
}

Json ToJson(const FactVocabulary& vocabulary) {
  Json out = Json::array();
  for (const auto& f : vocabulary.facts()) {
    out.push_back({{"id", f.id}, {"label", f.label}});
  }
  return out;
}

FactVocabulary VocabularyFromJson(const Json& j) {
  if (!j.is_array()) throw FormatError("vocabulary must be an array");
  std::vector<FactDescriptor> facts;
  for (const auto& item : j) {
    if (item.is_string()) {
      facts.push_back({item.get<std::string>(), item.get<std::string>()});
    } else {
      const auto id = Field<std::string>(item, "id", "vocabulary");
      facts.push_back({id, Optional<std::string>(item, "label", id)});
    }
  }
  try {
    return FactVocabulary(std::move(facts));
  } catch (const ConfigError& e) {
    throw FormatError(std::string("vocabulary: ") + e.what());
  }
}

Json ToJson(const std::vector<ClassInfo>& classes) {
  Json out = Json::array();
  for (const auto& c : classes) {
    out.push_back({{"name", c.name}, {"risk", c.risk}});
  }
  return out;
}

std::vector<ClassInfo> ClassesFromJson(const Json& j) {
  if (!j.is_array() || j.empty()) {
    throw FormatError("classes must be a non-empty array");
  }
  std::vector<ClassInfo> out;
  for (const auto& item : j) {
    out.push_back({Field<std::string>(item, "name", "classes"),
                   Optional<bool>(item, "risk", false)});
  }
  return out;
}

Json ToJson(const GeneratorConfig& c) {
  Json deps = Json::array();
  for (const auto& d : c.dependencies) {
    deps.push_back({{"child", c.vocabulary[d.child].id},
                    {"parent", c.vocabulary[d.parent].id},
                    {"p_if_parent", d.p_if_parent},
                    {"p_if_not_parent", d.p_if_not_parent}});
  }
  Json rules = Json::array();
  for (const auto& r : c.rules) {
    rules.push_back({{"positive", IndicesToIds(r.positive, c.vocabulary)},
                     {"negated", IndicesToIds(r.negated, c.vocabulary)},
                     {"target", c.classes.at(r.target).name},
                     {"priority", r.priority}});
  }
  return {{"vocabulary", ToJson(c.vocabulary)},
          {"classes", ToJson(c.classes)},
          {"default_class", c.classes.at(c.default_class).name},
          {"num_views", c.num_views},
          {"feature_dim", c.feature_dim},
          {"prior", c.prior},
          {"dependencies", deps},
          {"occlusion", c.occlusion},
          {"occlusion_table", c.occlusion_table},
          {"allow_total_occlusion", c.allow_total_occlusion},
          {"observation_noise", c.observation_noise},
          {"label_noise", c.label_noise},
          {"seed", c.seed},
          {"rules", rules}};
}

GeneratorConfig GeneratorConfigFromJson(const Json& j) {
  if (!j.is_object()) throw FormatError("generator config must be an object");
  GeneratorConfig c = Clinic8Config();
  if (j.contains("vocabulary")) {
    // A custom scenario must describe itself fully.
    c = GeneratorConfig{};
    c.vocabulary = VocabularyFromJson(j.at("vocabulary"));
    c.classes = ClassesFromJson(Field<Json>(j, "classes", "generator config"));
    c.prior = Field<std::vector<double>>(j, "prior", "generator config");
    if (!j.contains("rules")) {
      throw FormatError("generator config: missing field 'rules'");
    }
  }
  const std::string where = "generator config";
  if (j.contains("default_class")) {
    c.default_class = ClassIndex(
        c.classes, Field<std::string>(j, "default_class", where), where);
  }
  c.num_views = Optional<std::size_t>(j, "num_views", c.num_views);
  c.feature_dim = Optional<std::size_t>(j, "feature_dim", c.feature_dim);
  c.prior = Optional<std::vector<double>>(j, "prior", c.prior);
  if (j.contains("dependencies")) {
    c.dependencies.clear();
    for (const auto& d : j.at("dependencies")) {
      const auto child = IdsToIndices(Json::array({d.at("child")}),
                                      c.vocabulary, "dependency");
      const auto parent = IdsToIndices(Json::array({d.at("parent")}),
                                       c.vocabulary, "dependency");
      c.dependencies.push_back({child[0], parent[0],
                                Field<double>(d, "p_if_parent", where),
                                Field<double>(d, "p_if_not_parent", where)});
    }
  }
  c.occlusion = Optional<double>(j, "occlusion", c.occlusion);
  c.occlusion_table =
      Optional<std::vector<double>>(j, "occlusion_table", c.occlusion_table);
  c.allow_total_occlusion =
      Optional<bool>(j, "allow_total_occlusion", c.allow_total_occlusion);
  c.observation_noise =
      Optional<double>(j, "observation_noise", c.observation_noise);
  c.label_noise = Optional<double>(j, "label_noise", c.label_noise);
  c.seed = Optional<std::uint64_t>(j, "seed", c.seed);
  if (j.contains("rules")) {
    c.rules.clear();
    for (const auto& r : j.at("rules")) {
      GroundTruthRule rule;
      rule.positive =
          IdsToIndices(Optional<Json>(r, "positive", Json::array()),
                       c.vocabulary, "rule");
      rule.negated = IdsToIndices(Optional<Json>(r, "negated", Json::array()),
                                  c.vocabulary, "rule");
      rule.target =
          ClassIndex(c.classes, Field<std::string>(r, "target", where), where);
      rule.priority = Optional<int>(r, "priority", 0);
      c.rules.push_back(std::move(rule));
    }
  }
  try {
    c.Validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("generator config: ") + e.what());
  }
  return c;
}

Json ToJson(const Scenario& s) {
  Json views = Json::array();
  for (const auto& v : s.views) {
    views.push_back({{"features", v.features}, {"visible", v.visible}});
  }
  return {{"id", s.id}, {"facts", s.facts}, {"label", s.label},
          {"views", views}};
}

Scenario ScenarioFromJson(const Json& j) {
  const std::string where = "sample";
  Scenario s;
  s.id = Field<std::uint64_t>(j, "id", where);
  s.facts = Field<std::vector<std::uint8_t>>(j, "facts", where);
  s.label = Field<int>(j, "label", where);
  for (const auto& v : Field<Json>(j, "views", where)) {
    s.views.push_back({Field<std::vector<double>>(v, "features", where),
                       Field<std::vector<std::uint8_t>>(v, "visible", where)});
  }
  return s;
}

Json ToJson(const DatasetManifest& m) {
  return {{"config_hash", m.config_hash},
          {"count", m.count},
          {"class_histogram", m.class_histogram},
          {"census", m.census}};
}

void WriteDataset(const std::string& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  const auto base = std::filesystem::path(dir);
  WriteTextFile((base / "config.json").string(),
                ToJson(dataset.config).dump(2) + "\n");
  std::string lines;
  for (const auto& s : dataset.samples) lines += ToJson(s).dump() + "\n";
  WriteTextFile((base / "samples.jsonl").string(), lines);
  WriteTextFile(
      (base / "manifest.json").string(),
      ToJson(BuildManifest(dataset.config, dataset.samples)).dump(2) + "\n");
}

Dataset ReadDataset(const std::string& dir) {
  const auto base = std::filesystem::path(dir);
  Dataset d;
  d.config = GeneratorConfigFromJson(
      ParseJson(ReadTextFile((base / "config.json").string()), "config.json"));
  std::istringstream in(ReadTextFile((base / "samples.jsonl").string()));
  std::string line;
  std::size_t lineno = 0;
  const std::size_t n = d.config.vocabulary.size();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Scenario s = ScenarioFromJson(
        ParseJson(line, "samples.jsonl line " + std::to_string(lineno)));
    if (s.facts.size() != n || s.views.size() != d.config.num_views ||
        s.label < 0 ||
        static_cast<std::size_t>(s.label) >= d.config.classes.size()) {
      throw FormatError("samples.jsonl line " + std::to_string(lineno) +
                        ": shape does not match config");
    }
    d.samples.push_back(std::move(s));
  }
  const auto manifest_path = base / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    const Json m =
        ParseJson(ReadTextFile(manifest_path.string()), "manifest.json");
    if (Optional<std::string>(m, "config_hash", "") != ConfigHash(d.config)) {
      throw FormatError("manifest config hash does not match config.json");
    }
  }
  return d;
}

Json ModelHyperToJson(const ModelConfig& c) {
  return {{"num_rules", c.num_rules},
          {"num_slots", c.num_slots},
          {"tau_start", c.tau_start},
          {"tau_end", c.tau_end},
          {"fusion_eps", c.fusion.eps},
          {"uniform_attribution", c.fusion.uniform_attribution}};
}

ModelConfig ModelHyperFromJson(const Json& j) {
  ModelConfig c;
  c.num_rules = Optional<std::size_t>(j, "num_rules", c.num_rules);
  c.num_slots = Optional<std::size_t>(j, "num_slots", c.num_slots);
  c.tau_start = Optional<double>(j, "tau_start", c.tau_start);
  c.tau_end = Optional<double>(j, "tau_end", c.tau_end);
  c.fusion.eps = Optional<double>(j, "fusion_eps", c.fusion.eps);
  c.fusion.uniform_attribution = Optional<bool>(
      j, "uniform_attribution", c.fusion.uniform_attribution);
  return c;
}

Json ToJson(const TrainConfig& c) {
  return {
      {"epochs", c.epochs},
      {"warmup_epochs", c.warmup_epochs},
      {"batch_size", c.batch_size},
      {"learning_rate", c.learning_rate},
      {"adam",
       {{"beta1", c.adam.beta1},
        {"beta2", c.adam.beta2},
        {"eps", c.adam.eps},
        {"weight_decay", c.adam.weight_decay}}},
      {"fact_weight", c.fact_weight},
      {"sparsity_max", c.sparsity_max},
      {"sparsity_start", c.sparsity_start},
      {"sparsity_ramp", c.sparsity_ramp},
      {"sparsity_form", SparsityName(c.sparsity_form)},
      {"supervision", SupervisionName(c.supervision)},
      {"semi_fraction", c.semi_fraction},
      {"sampled_selection", c.sampled_selection},
      {"hard_forward", c.hard_forward},
      {"nonnegative_rule_weights", c.nonnegative_rule_weights},
      {"seed", c.seed},
      {"init",
       {{"head_scale", c.init.head_scale},
        {"selection_scale", c.init.selection_scale},
        {"rule_weight_scale", c.init.rule_weight_scale}}},
      {"rules",
       {{"tau_prune", c.rules.tau_prune},
        {"rho_min", c.rules.prune.rho_min},
        {"min_weight", c.rules.prune.min_weight}}},
      {"track_rules", c.track_rules},
  };
}

TrainConfig TrainConfigFromJson(const Json& j) {
  TrainConfig c;
  c.epochs = Optional<std::size_t>(j, "epochs", c.epochs);
  c.warmup_epochs = Optional<std::size_t>(j, "warmup_epochs", c.warmup_epochs);
  c.batch_size = Optional<std::size_t>(j, "batch_size", c.batch_size);
  c.learning_rate = Optional<double>(j, "learning_rate", c.learning_rate);
  const Json adam = Optional<Json>(j, "adam", Json::object());
  c.adam.beta1 = Optional<double>(adam, "beta1", c.adam.beta1);
  c.adam.beta2 = Optional<double>(adam, "beta2", c.adam.beta2);
  c.adam.eps = Optional<double>(adam, "eps", c.adam.eps);
  c.adam.weight_decay =
      Optional<double>(adam, "weight_decay", c.adam.weight_decay);
  c.fact_weight = Optional<double>(j, "fact_weight", c.fact_weight);
  c.sparsity_max = Optional<double>(j, "sparsity_max", c.sparsity_max);
  c.sparsity_start =
      Optional<std::size_t>(j, "sparsity_start", c.sparsity_start);
  c.sparsity_ramp = Optional<std::size_t>(j, "sparsity_ramp", c.sparsity_ramp);
  c.sparsity_form = SparsityFromName(
      Optional<std::string>(j, "sparsity_form", SparsityName(c.sparsity_form)));
  c.supervision = SupervisionFromName(
      Optional<std::string>(j, "supervision", SupervisionName(c.supervision)));
  c.semi_fraction = Optional<double>(j, "semi_fraction", c.semi_fraction);
  c.sampled_selection =
      Optional<bool>(j, "sampled_selection", c.sampled_selection);
  c.hard_forward = Optional<bool>(j, "hard_forward", c.hard_forward);
  c.nonnegative_rule_weights = Optional<bool>(j, "nonnegative_rule_weights",
                                              c.nonnegative_rule_weights);
  c.seed = Optional<std::uint64_t>(j, "seed", c.seed);
  const Json init = Optional<Json>(j, "init", Json::object());
  c.init.head_scale = Optional<double>(init, "head_scale", c.init.head_scale);
  c.init.selection_scale =
      Optional<double>(init, "selection_scale", c.init.selection_scale);
  c.init.rule_weight_scale =
      Optional<double>(init, "rule_weight_scale", c.init.rule_weight_scale);
  const Json rules = Optional<Json>(j, "rules", Json::object());
  c.rules.tau_prune = Optional<double>(rules, "tau_prune", c.rules.tau_prune);
  c.rules.prune.rho_min =
      Optional<double>(rules, "rho_min", c.rules.prune.rho_min);
  c.rules.prune.min_weight =
      Optional<double>(rules, "min_weight", c.rules.prune.min_weight);
  c.track_rules = Optional<bool>(j, "track_rules", c.track_rules);
  try {
    c.Validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("training config: ") + e.what());
  }
  return c;
}

Json ToJson(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"phase", r.phase},
          {"learning_rate", r.learning_rate},
          {"temperature", r.temperature},
          {"sparsity_weight", r.sparsity_weight},
          {"loss",
           {{"classification", r.classification},
            {"fact", OptionalJson(r.fact)},
            {"sparsity", r.sparsity},
            {"total", r.total}}},
          {"active_rules",
           r.active_rules ? Json(*r.active_rules) : Json(nullptr)},
          {"risk_rules", r.risk_rules ? Json(*r.risk_rules) : Json(nullptr)},
          {"val_accuracy", OptionalJson(r.val_accuracy)},
          {"val_fact_accuracy", OptionalJson(r.val_fact_accuracy)}};
}

Json CheckpointToJson(const LogicModel& model, const TrainConfig* train,
                      const std::string& dataset_hash,
                      const std::vector<EpochRecord>& history,
                      const RuleSet* rules) {
  const ModelConfig& c = model.config();
  Json params = Json::array();
  for (const ParamGroup& g : model.params().groups()) {
    for (double v : g.value) {
      if (!std::isfinite(v)) {
        throw NumericalError(g.name, "refusing to save non-finite parameter");
      }
    }
    params.push_back({{"name", g.name}, {"shape", g.shape}, {"values", g.value}});
  }
  std::string lines;
  for (const auto& r : history) lines += ToJson(r).dump() + "\n";
  Json digest = {{"epochs", history.size()}, {"fnv1a", Fnv64(lines)}};
  digest["final"] = history.empty() ? Json(nullptr) : ToJson(history.back());
  Json out = {{"format", kCheckpointFormat},
              {"version", kCheckpointVersion},
              {"vocabulary", ToJson(c.vocabulary)},
              {"classes", ToJson(c.classes)},
              {"feature_dim", c.feature_dim},
              {"model", ModelHyperToJson(c)},
              {"training", train ? ToJson(*train) : Json(nullptr)},
              {"dataset_hash", dataset_hash},
              {"history_digest", digest},
              {"params", params}};
  out["rules"] = rules ? ToJson(*rules, c.vocabulary, c.classes) : Json(nullptr);
  return out;
}

Checkpoint CheckpointFromJson(const Json& j) {
  const std::string where = "checkpoint";
  if (!j.is_object()) throw FormatError("checkpoint must be an object");
  if (Optional<std::string>(j, "format", "") != kCheckpointFormat) {
    throw FormatError("not a checkpoint (format field missing or wrong)");
  }
  const int version = Field<int>(j, "version", where);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " +
                      std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  ModelConfig mc = ModelHyperFromJson(Field<Json>(j, "model", where));
  mc.vocabulary = VocabularyFromJson(Field<Json>(j, "vocabulary", where));
  mc.classes = ClassesFromJson(Field<Json>(j, "classes", where));
  mc.feature_dim = Field<std::size_t>(j, "feature_dim", where);
  std::optional<LogicModel> model;
  try {
    model.emplace(mc);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint model: ") + e.what());
  }
  const Json& params = Field<Json>(j, "params", where);
  if (!params.is_array() || params.size() != model->params().groups().size()) {
    throw FormatError("checkpoint parameter groups do not match the model");
  }
  for (const auto& item : params) {
    const auto name = Field<std::string>(item, "name", where);
    if (!model->params().Has(name)) {
      throw FormatError("checkpoint has unknown parameter group '" + name + "'");
    }
    ParamGroup& g = model->params().Get(name);
    if (Field<std::vector<std::size_t>>(item, "shape", where) != g.shape) {
      throw FormatError("checkpoint shape mismatch for '" + name + "'");
    }
    auto values = Field<std::vector<double>>(item, "values", where);
    if (values.size() != g.value.size()) {
      throw FormatError("checkpoint value count mismatch for '" + name + "'");
    }
    g.value = std::move(values);
  }
  Checkpoint ck{std::move(*model), std::nullopt,
                Optional<std::string>(j, "dataset_hash", ""),
                Optional<Json>(j, "history_digest", Json(nullptr)),
                std::nullopt};
  if (j.contains("training") && !j.at("training").is_null()) {
    ck.train = TrainConfigFromJson(j.at("training"));
  }
  if (j.contains("rules") && !j.at("rules").is_null()) {
    ck.rules = RuleSetFromJson(j.at("rules"), ck.model.config().vocabulary,
                               ck.model.config().classes);
  }
  return ck;
}

void SaveCheckpoint(const std::string& path, const Json& checkpoint) {
  WriteTextFile(path, checkpoint.dump(1) + "\n");
}

Checkpoint LoadCheckpoint(const std::string& path) {
  return CheckpointFromJson(ParseJson(ReadTextFile(path), path));
}

Json ToJson(const RuleSet& rules, const FactVocabulary& vocabulary,
            const std::vector<ClassInfo>& classes) {
  Json items = Json::array();
  for (const auto& r : rules.rules) {
    items.push_back({{"index", r.index},
                     {"class", classes.at(r.top_class()).name},
                     {"text", Render(r, vocabulary, classes)},
                     {"positive", IndicesToIds(r.positive, vocabulary)},
                     {"negated", IndicesToIds(r.negated, vocabulary)},
                     {"class_weights", r.class_weights},
                     {"reliability", r.reliability}});
  }
  return {{"format", kRuleSetFormat},
          {"version", kRuleSetVersion},
          {"tau_prune", rules.tau_prune},
          {"rho_min", rules.rho_min},
          {"min_weight", rules.min_weight},
          {"temperature", rules.temperature},
          {"warnings", rules.warnings},
          {"rules", items}};
}

RuleSet RuleSetFromJson(const Json& j, const FactVocabulary& vocabulary,
                        const std::vector<ClassInfo>& classes) {
  const std::string where = "rule set";
  if (Optional<std::string>(j, "format", "") != kRuleSetFormat) {
    throw FormatError("not a rule set (format field missing or wrong)");
  }
  if (Field<int>(j, "version", where) != kRuleSetVersion) {
    throw FormatError("unsupported rule set version");
  }
  RuleSet set;
  set.tau_prune = Field<double>(j, "tau_prune", where);
  set.rho_min = Field<double>(j, "rho_min", where);
  set.min_weight = Optional<double>(j, "min_weight", 0.0);
  set.temperature = Optional<double>(j, "temperature", set.temperature);
  set.warnings = Optional<std::vector<std::string>>(j, "warnings", {});
  for (const auto& item : Field<Json>(j, "rules", where)) {
    SymbolicRule r;
    r.index = Field<std::size_t>(item, "index", where);
    r.positive = IdsToIndices(Field<Json>(item, "positive", where), vocabulary,
                              where);
    r.negated =
        IdsToIndices(Field<Json>(item, "negated", where), vocabulary, where);
    r.class_weights = Field<std::vector<double>>(item, "class_weights", where);
    if (r.class_weights.size() != classes.size()) {
      throw FormatError("rule set class weights do not match the classes");
    }
    r.reliability = Field<double>(item, "reliability", where);
    set.rules.push_back(std::move(r));
  }
  return set;
}

Json ToJson(const MetricsReport& m, const std::vector<ClassInfo>& classes) {
  Json per_class = Json::array();
  for (std::size_t y = 0; y < classes.size() && y < m.precision.size(); ++y) {
    per_class.push_back({{"class", classes[y].name},
                         {"precision", m.precision[y]},
                         {"recall", m.recall[y]}});
  }
  return {{"count", m.count},
          {"accuracy", OptionalJson(m.accuracy)},
          {"macro_f1", OptionalJson(m.macro_f1)},
          {"per_class", per_class},
          {"k", m.k},
          {"mean_recall_at_k", OptionalJson(m.mean_recall_at_k)},
          {"mean_average_precision", OptionalJson(m.mean_average_precision)},
          {"auc", OptionalJson(m.auc)},
          {"false_alarm_rate", OptionalJson(m.false_alarm_rate)},
          {"compositional_accuracy", OptionalJson(m.compositional_accuracy)},
          {"novel_pattern_rate", OptionalJson(m.novel_pattern_rate)},
          {"counterfactual_validity", OptionalJson(m.counterfactual_validity)},
          {"fact_accuracy", OptionalJson(m.fact_accuracy)}};
}

Json ToJson(const CounterfactualResult& r, const FactVocabulary& vocabulary,
            const std::vector<ClassInfo>& classes) {
  Json ivs = Json::array();
  for (const auto& iv : r.interventions) {
    ivs.push_back({{"fact", vocabulary[iv.fact].id},
                   {"index", iv.fact},
                   {"value", static_cast<int>(iv.value)}});
  }
  return {{"interventions", ivs},
          {"cardinality", r.cardinality()},
          {"original", PosteriorJson(r.original_label, r.original_posterior,
                                     classes)},
          {"counterfactual",
           PosteriorJson(r.new_label, r.new_posterior, classes)},
          {"risk_before", r.risk_before},
          {"risk_after", r.risk_after},
          {"risk_delta", r.risk_delta()},
          {"risk_change_percent", r.risk_change_percent()},
          {"exact", r.exact}};
}

Json ToJson(const SensitivityEntry& e, const FactVocabulary& vocabulary,
            const std::vector<ClassInfo>& classes) {
  return {{"fact", vocabulary[e.intervention.fact].id},
          {"index", e.intervention.fact},
          {"value", static_cast<int>(e.intervention.value)},
          {"result", PosteriorJson(e.label, e.posterior, classes)},
          {"label_changed", e.label_changed},
          {"risk_delta", e.risk_delta}};
}

Json ToJson(const ExplanationPayload& p, const FactVocabulary& vocabulary,
            const std::vector<ClassInfo>& classes) {
  Json facts = Json::array();
  for (std::size_t k = 0; k < p.facts.confidence.size(); ++k) {
    Json f = {{"id", vocabulary[k].id}, {"confidence", p.facts.confidence[k]}};
    if (p.facts.num_views > 0) {
      std::vector<double> a(p.facts.num_views);
      for (std::size_t v = 0; v < a.size(); ++v) {
        a[v] = p.facts.attribution_at(k, v);
      }
      f["attribution"] = a;
    }
    facts.push_back(std::move(f));
  }
  Json fired = Json::array();
  for (const auto& t : p.fired) {
    fired.push_back({{"rule", t.rule},
                     {"text", t.text},
                     {"strength", t.strength},
                     {"contribution", t.contribution}});
  }
  Json suggestions = Json::array();
  for (const auto& s : p.suggestions) {
    suggestions.push_back(ToJson(s, vocabulary, classes));
  }
  return {{"predicted", PosteriorJson(p.predicted, p.posterior, classes)},
          {"facts", facts},
          {"fired_rules", fired},
          {"suggestions", suggestions},
          {"counterfactual",
           p.counterfactual ? ToJson(*p.counterfactual, vocabulary, classes)
                            : Json(nullptr)},
          {"counterfactual_incomplete", p.counterfactual_incomplete}};
}

std::vector<double> ConfidencesFromJson(const Json& j,
                                        const FactVocabulary& vocabulary) {
  const std::size_t n = vocabulary.size();
  std::vector<double> c(n, 0.0);
  auto value = [](const Json& v, const std::string& name) {
    if (!v.is_number()) {
      throw FormatError("fact '" + name + "' must be a number");
    }
    const double x = v.get<double>();
    if (!(x >= 0.0 && x <= 1.0)) {
      throw FormatError("fact '" + name + "' must lie in [0, 1]");
    }
    return x;
  };
  if (j.is_array()) {
    if (j.size() != n) {
      throw VocabularyMismatch("expected " + std::to_string(n) +
                               " fact confidences, got " +
                               std::to_string(j.size()));
    }
    for (std::size_t k = 0; k < n; ++k) c[k] = value(j[k], vocabulary[k].id);
    return c;
  }
  if (!j.is_object()) {
    throw FormatError("facts must be an array or an object keyed by fact id");
  }
  std::vector<std::uint8_t> seen(n, 0);
  for (const auto& [key, v] : j.items()) {
    const auto k = vocabulary.IndexOf(key);
    if (!k) throw VocabularyMismatch("unknown fact '" + key + "'");
    c[*k] = value(v, key);
    seen[*k] = 1;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!seen[k]) {
      throw VocabularyMismatch("missing fact '" + vocabulary[k].id + "'");
    }
  }
  return c;
}

std::vector<ViewObservation> ViewsFromJson(const Json& j, std::size_t num_facts,
                                           std::size_t feature_dim) {
  if (!j.is_array() || j.empty()) {
    throw FormatError("views must be a non-empty array");
  }
  std::vector<ViewObservation> out;
  for (const auto& v : j) {
    ViewObservation obs;
    obs.features = Field<std::vector<double>>(v, "features", "view");
    if (v.contains("visible")) {
      obs.visible = Field<std::vector<std::uint8_t>>(v, "visible", "view");
    }
    if (obs.features.size() != feature_dim) {
      throw VocabularyMismatch("view features must have length " +
                               std::to_string(feature_dim));
    }
    if (!obs.visible.empty() && obs.visible.size() != num_facts) {
      throw VocabularyMismatch("view visibility must have length " +
                               std::to_string(num_facts));
    }
    for (double x : obs.features) {
      if (!std::isfinite(x)) throw FormatError("view features must be finite");
    }
    out.push_back(std::move(obs));
  }
  return out;
}

}  // namespace factrule
