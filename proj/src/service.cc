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

#include "factrule/service.h"

#include <algorithm>

#include "factrule/counterfactual.h"
#include "factrule/errors.h"
#include "httplib.h"

namespace factrule {

namespace {

ServiceResponse Error(int status, const std::string& code,
                      const std::string& message,
                      const std::string& field = "") {
  Json err = {{"code", code}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  return {status, {{"error", err}}};
}

// Malformed request body, mapped to 400.
class BadRequest : public std::runtime_error {
 public:
  BadRequest(const std::string& field, const std::string& message)
      : std::runtime_error(message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

const Json& Require(const Json& body, const char* field) {
  if (!body.contains(field)) {
    throw BadRequest(field, std::string("missing field '") + field + "'");
  }
  return body.at(field);
}

template <typename T>
T OptionalField(const Json& body, const char* field, T fallback) {
  if (!body.contains(field) || body.at(field).is_null()) return fallback;
  try {
    return body.at(field).get<T>();
  } catch (const Json::exception&) {
    throw BadRequest(field, std::string("field '") + field +
                                "' has the wrong type");
  }
}

std::size_t ArgMax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) -
                                  v.begin());
}

}  // namespace

ExplanationService::ExplanationService(LogicModel model, RuleSet rules,
                                       ServiceOptions options)
    : model_(std::make_unique<const LogicModel>(std::move(model))),
      rules_(std::move(rules)),
      options_(options),
      reasoner_(std::make_unique<const Reasoner>(*model_)) {
  for (const auto& r : rules_.rules) {
    if (r.index >= model_->dims().num_rules ||
        r.class_weights.size() != model_->num_classes()) {
      throw ConfigError("rule set does not match the model");
    }
  }
}

ServiceResponse ExplanationService::Handle(const std::string& method,
                                           const std::string& path,
                                           const std::string& body) const {
  try {
    if (method == "GET") {
      if (path == "/health") return Health();
      if (path == "/model") return Model();
      if (path == "/rules") return Rules();
    } else if (method == "POST") {
      if (path != "/infer" && path != "/counterfactual" && path != "/whatif") {
        return Error(404, "not_found", "no endpoint " + method + " " + path);
      }
      Json parsed;
      try {
        parsed = Json::parse(body);
      } catch (const Json::parse_error&) {
        return Error(400, "malformed", "request body is not valid JSON");
      }
      if (!parsed.is_object()) {
        return Error(400, "malformed", "request body must be a JSON object");
      }
      if (path == "/infer") return Infer(parsed);
      if (path == "/counterfactual") return Counterfactual(parsed);
      return WhatIf(parsed);
    }
    return Error(404, "not_found", "no endpoint " + method + " " + path);
  } catch (const BadRequest& e) {
    return Error(400, "malformed", e.what(), e.field());
  } catch (const FormatError& e) {
    return Error(400, "malformed", e.what());
  } catch (const VocabularyMismatch& e) {
    return Error(422, "vocabulary_mismatch", e.what());
  } catch (const ConfigError& e) {
    return Error(422, "vocabulary_mismatch", e.what());
  }
}

ServiceResponse ExplanationService::Health() const {
  return {200, {{"status", "ok"}}};
}

ServiceResponse ExplanationService::Model() const {
  const ModelConfig& c = model_->config();
  return {200,
          {{"vocabulary", ToJson(c.vocabulary)},
           {"classes", ToJson(c.classes)},
           {"feature_dim", c.feature_dim},
           {"hyperparameters", ModelHyperToJson(c)},
           {"search",
            {{"budget_ms", options_.search_budget.count()},
             {"default_max_card", options_.default_max_card}}}}};
}

ServiceResponse ExplanationService::Rules() const {
  const ModelConfig& c = model_->config();
  return {200, ToJson(rules_, c.vocabulary, c.classes)};
}

ServiceResponse ExplanationService::Infer(const Json& body) const {
  const ModelConfig& c = model_->config();
  const bool has_facts = body.contains("facts");
  const bool has_views = body.contains("views");
  if (has_facts == has_views) {
    throw BadRequest("facts", "provide exactly one of 'facts' or 'views'");
  }
  FactGraph graph;
  if (has_facts) {
    graph = FactGraphFromConfidences(
        ConfidencesFromJson(body.at("facts"), c.vocabulary));
  } else {
    const auto views =
        ViewsFromJson(body.at("views"), model_->num_facts(), c.feature_dim);
    graph = BuildFactGraph(views, model_->heads(), c.fusion);
  }
  ExplainOptions opts;
  opts.fire_threshold = options_.fire_threshold;
  opts.top_suggestions = options_.top_suggestions;
  opts.exact_counterfactual = OptionalField<bool>(body, "exact_cf", false);
  opts.search.max_card = options_.default_max_card;
  opts.budget = options_.search_budget;
  const ExplanationPayload p = Explain(*reasoner_, std::move(graph), rules_, opts);
  return {200, ToJson(p, c.vocabulary, c.classes)};
}

ServiceResponse ExplanationService::Counterfactual(const Json& body) const {
  const ModelConfig& c = model_->config();
  const auto confidence =
      ConfidencesFromJson(Require(body, "facts"), c.vocabulary);
  const Json options = OptionalField<Json>(body, "options", Json::object());
  if (!options.is_object()) {
    throw BadRequest("options", "options must be an object");
  }
  const bool exact = OptionalField<bool>(options, "exact", true);
  const int max_card = OptionalField<int>(
      options, "max_card", static_cast<int>(options_.default_max_card));
  if (max_card < 1 || static_cast<std::size_t>(max_card) > confidence.size()) {
    throw BadRequest("options.max_card",
                     "max_card must lie in [1, number of facts]");
  }
  SearchOptions search;
  search.max_card = static_cast<std::size_t>(max_card);
  bool incomplete = false;
  const auto result = FindCounterfactual(*reasoner_, confidence, exact, search,
                                         options_.search_budget, &incomplete);
  Json out = {{"found", result.has_value()},
              {"incomplete", incomplete},
              {"result", result ? ToJson(*result, c.vocabulary, c.classes)
                                : Json(nullptr)}};
  if (!result) {
    out["message"] = "no intervention of at most " + std::to_string(max_card) +
                     " facts changes the prediction";
  }
  return {incomplete ? 504 : 200, out};
}

ServiceResponse ExplanationService::WhatIf(const Json& body) const {
  const ModelConfig& c = model_->config();
  const auto confidence =
      ConfidencesFromJson(Require(body, "facts"), c.vocabulary);
  const Json& iv = Require(body, "intervention");
  if (!iv.is_object() || !iv.contains("fact") || !iv.contains("value") ||
      !iv.at("fact").is_string() || !iv.at("value").is_number()) {
    throw BadRequest("intervention",
                     "intervention must be {\"fact\": id, \"value\": number}");
  }
  const std::string id = iv.at("fact").get<std::string>();
  const auto k = c.vocabulary.IndexOf(id);
  if (!k) throw VocabularyMismatch("unknown fact '" + id + "'");
  const double value = iv.at("value").get<double>();
  if (!(value >= 0.0 && value <= 1.0)) {
    throw BadRequest("intervention.value", "value must lie in [0, 1]");
  }
  std::vector<double> after = confidence;
  after[*k] = value;
  const RuleActivation a0 = reasoner_->Evaluate(confidence);
  const RuleActivation a1 = reasoner_->Evaluate(after);
  const double r0 = RiskProbability(c.classes, a0.posterior);
  const double r1 = RiskProbability(c.classes, a1.posterior);
  Json rules = Json::array();
  for (const auto& rule : rules_.rules) {
    rules.push_back({{"rule", rule.index},
                     {"text", Render(rule, c.vocabulary, c.classes)},
                     {"strength_before", a0.strength[rule.index]},
                     {"strength_after", a1.strength[rule.index]}});
  }
  const std::size_t y0 = ArgMax(a0.posterior);
  const std::size_t y1 = ArgMax(a1.posterior);
  return {200,
          {{"before",
            {{"index", y0},
             {"name", c.classes[y0].name},
             {"posterior", a0.posterior}}},
           {"after",
            {{"index", y1},
             {"name", c.classes[y1].name},
             {"posterior", a1.posterior}}},
           {"facts", after},
           {"risk_before", r0},
           {"risk_after", r1},
           {"risk_delta", r1 - r0},
           {"risk_change_percent", r0 == 0.0 ? 0.0 : 100.0 * (r1 - r0) / r0},
           {"rules", rules}}};
}

void ExplanationService::Mount(httplib::Server& server) const {
  auto bind = [this](const std::string& method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      const ServiceResponse r = Handle(method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
  };
  for (const char* path : {"/health", "/model", "/rules"}) {
    server.Get(path, bind("GET"));
  }
  for (const char* path : {"/infer", "/counterfactual", "/whatif"}) {
    server.Post(path, bind("POST"));
  }
  server.set_error_handler([](const httplib::Request& req,
                              httplib::Response& res) {
    if (!res.body.empty()) return;
    const Json body = {{"error",
                        {{"code", res.status == 404 ? "not_found" : "error"},
                         {"message", "no endpoint " + req.method + " " +
                                         req.path}}}};
    res.set_content(body.dump(), "application/json");
  });
}

bool ServeBlocking(const ExplanationService& service, httplib::Server& server,
                   const std::string& host, int port, int* bound_port) {
  service.Mount(server);
  int actual = port;
  if (port == 0) {
    actual = server.bind_to_any_port(host);
    if (actual < 0) return false;
  } else if (!server.bind_to_port(host, port)) {
    return false;
  }
  if (bound_port) *bound_port = actual;
  return server.listen_after_bind();
}

}  // namespace factrule
