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

#include <future>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "factrule/io.h"
#include "factrule/rules.h"
#include "factrule/scenario.h"
#include "factrule/service.h"
#include "gtest/gtest.h"
#include "httplib.h"
#include "test_util.h"

namespace factrule {
namespace {

RuleSet ReferenceRules(const LogicModel& model, const GeneratorConfig& gen) {
  const Dataset d = GenerateDataset(gen, 1000);
  std::vector<ValidationPoint> points;
  for (const auto& s : d.samples) {
    points.push_back({{s.facts.begin(), s.facts.end()}, s.label});
  }
  return ExtractRules(model, points);
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    LogicModel model = testing::GroundTruthModel(gen_);
    RuleSet rules = ReferenceRules(model, gen_);
    service_ = std::make_unique<ExplanationService>(std::move(model),
                                                    std::move(rules));
    service_->Mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Result Post(httplib::Client& client, const std::string& path,
                       const Json& body) {
    return client.Post(path, body.dump(), "application/json");
  }

  std::vector<double> CanonicalRisk() const {
    std::vector<double> c(8, 0.0);
    c[*gen_.vocabulary.IndexOf("rail_down")] = 0.95;
    c[*gen_.vocabulary.IndexOf("edge_sitting")] = 0.95;
    c[*gen_.vocabulary.IndexOf("caregiver_near")] = 0.05;
    c[*gen_.vocabulary.IndexOf("on_bed")] = 0.95;
    return c;
  }

  GeneratorConfig gen_ = Clinic8Config();
  std::unique_ptr<ExplanationService> service_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST_F(ServiceTest, HealthModelAndRules) {
  httplib::Client client("127.0.0.1", port_);
  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(Json::parse(health->body)["status"], "ok");
  auto model = client.Get("/model");
  ASSERT_TRUE(model);
  EXPECT_EQ(Json::parse(model->body)["vocabulary"].size(), 8u);
  auto rules = client.Get("/rules");
  ASSERT_TRUE(rules);
  const Json r = Json::parse(rules->body);
  EXPECT_EQ(r["format"], kRuleSetFormat);
  EXPECT_FALSE(r["rules"].empty());
  EXPECT_EQ(client.Get("/nope")->status, 404);
}

TEST_F(ServiceTest, InferMatchesInProcessReasoning) {
  httplib::Client client("127.0.0.1", port_);
  const Reasoner reasoner(service_->model());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> c(8);
    for (double& x : c) x = unif(rng);
    auto res = Post(client, "/infer", {{"facts", c}});
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200) << res->body;
    const Json body = Json::parse(res->body);
    const auto expected = reasoner.Posterior(c);
    ASSERT_EQ(body["predicted"]["posterior"].get<std::vector<double>>(),
              expected);
  }
}

TEST_F(ServiceTest, InferFromViewsMatchesFusion) {
  httplib::Client client("127.0.0.1", port_);
  const Dataset d = GenerateDataset(gen_, 20);
  for (const auto& s : d.samples) {
    Json views = Json::array();
    for (const auto& v : s.views) views.push_back({{"features", v.features}});
    auto res = Post(client, "/infer", {{"views", views}});
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200) << res->body;
    const Inference inf = service_->model().Infer(s.views);
    const Json body = Json::parse(res->body);
    EXPECT_EQ(body["predicted"]["posterior"].get<std::vector<double>>(),
              inf.activation.posterior);
    EXPECT_EQ(body["facts"][0]["attribution"].size(), s.views.size());
  }
}

TEST_F(ServiceTest, InterleavedRequestsMatchSerial) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::pair<std::string, Json>> requests;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> c(8);
    for (double& x : c) x = unif(rng) < 0.5 ? 0.1 * unif(rng) : 0.9 + 0.1 * unif(rng);
    switch (i % 3) {
      case 0:
        requests.push_back({"/infer", {{"facts", c}, {"exact_cf", true}}});
        break;
      case 1:
        requests.push_back({"/counterfactual", {{"facts", c}}});
        break;
      default:
        requests.push_back(
            {"/whatif",
             {{"facts", c},
              {"intervention", {{"fact", "caregiver_near"}, {"value", 1}}}}});
    }
  }
  auto run = [&](std::size_t i) {
    httplib::Client client("127.0.0.1", port_);
    auto res = Post(client, requests[i].first, requests[i].second);
    return res ? std::to_string(res->status) + res->body : std::string("fail");
  };
  std::vector<std::string> serial;
  for (std::size_t i = 0; i < requests.size(); ++i) serial.push_back(run(i));
  std::vector<std::future<std::string>> futures;
  std::vector<std::string> parallel(requests.size());
  for (std::size_t t = 0; t < 4; ++t) {
    futures.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t i = t; i < requests.size(); i += 4) parallel[i] = run(i);
      return std::string();
    }));
  }
  for (auto& f : futures) f.get();
  for (std::size_t i = 0; i < requests.size(); ++i) {
    EXPECT_EQ(parallel[i], serial[i]) << requests[i].first;
    EXPECT_EQ(serial[i].substr(0, 3), "200") << serial[i];
  }
}

TEST_F(ServiceTest, WhatIfCaregiverLowersRisk) {
  httplib::Client client("127.0.0.1", port_);
  const auto c = CanonicalRisk();
  auto before = Post(client, "/infer", {{"facts", c}});
  ASSERT_TRUE(before);
  EXPECT_EQ(Json::parse(before->body)["predicted"]["name"],
            "Unattended-Exit-Risk");
  auto res = Post(client, "/whatif",
                  {{"facts", c},
                   {"intervention", {{"fact", "caregiver_near"}, {"value", 1}}}});
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  const Json body = Json::parse(res->body);
  EXPECT_LT(body["risk_after"].get<double>(), body["risk_before"].get<double>());
  EXPECT_LT(body["risk_delta"].get<double>(), 0.0);
  EXPECT_NE(body["after"]["name"], "Unattended-Exit-Risk");
  // The reported posterior reproduces in-process reasoning on the edited facts.
  auto edited = c;
  edited[*gen_.vocabulary.IndexOf("caregiver_near")] = 1.0;
  EXPECT_EQ(body["after"]["posterior"].get<std::vector<double>>(),
            Reasoner(service_->model()).Posterior(edited));
}

TEST_F(ServiceTest, CounterfactualEndpoint) {
  httplib::Client client("127.0.0.1", port_);
  auto res = Post(client, "/counterfactual", {{"facts", CanonicalRisk()}});
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  const Json body = Json::parse(res->body);
  EXPECT_TRUE(body["found"].get<bool>());
  EXPECT_EQ(body["result"]["cardinality"], 1);
  EXPECT_FALSE(body["incomplete"].get<bool>());
}

TEST_F(ServiceTest, ErrorStatuses) {
  httplib::Client client("127.0.0.1", port_);
  auto malformed = client.Post("/infer", "{oops", "application/json");
  ASSERT_TRUE(malformed);
  EXPECT_EQ(malformed->status, 400);
  EXPECT_EQ(Json::parse(malformed->body)["error"]["code"], "malformed");

  auto both = Post(client, "/infer", {{"facts", std::vector<double>(8, 0.5)},
                                      {"views", Json::array()}});
  EXPECT_EQ(both->status, 400);
  auto range = Post(client, "/infer", {{"facts", std::vector<double>(8, 1.5)}});
  EXPECT_EQ(range->status, 400);

  auto short_vec = Post(client, "/infer", {{"facts", std::vector<double>(3, 0.5)}});
  EXPECT_EQ(short_vec->status, 422);
  EXPECT_EQ(Json::parse(short_vec->body)["error"]["code"], "vocabulary_mismatch");
  auto unknown = Post(client, "/whatif",
                      {{"facts", CanonicalRisk()},
                       {"intervention", {{"fact", "window_open"}, {"value", 1}}}});
  EXPECT_EQ(unknown->status, 422);
}

TEST(ServiceHandleTest, SearchTimeoutReports504) {
  const GeneratorConfig gen = Clinic8Config();
  LogicModel model = testing::GroundTruthModel(gen);
  RuleSet rules = ReferenceRules(model, gen);
  ServiceOptions opts;
  opts.search_budget = std::chrono::milliseconds(0);
  const ExplanationService service(std::move(model), std::move(rules), opts);
  std::vector<double> c(8, 0.0);
  c[0] = c[1] = c[5] = 1.0;
  const ServiceResponse r =
      service.Handle("POST", "/counterfactual", Json({{"facts", c}}).dump());
  EXPECT_EQ(r.status, 504);
  EXPECT_TRUE(r.body["incomplete"].get<bool>());
  EXPECT_EQ(service.Handle("GET", "/health", "").status, 200);
  EXPECT_EQ(service.Handle("DELETE", "/health", "").status, 404);
}

}  // namespace
}  // namespace factrule
