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

#ifndef FACTRULE_SERVICE_H_
#define FACTRULE_SERVICE_H_

#include <chrono>
#include <memory>
#include <string>

#include "factrule/explain.h"
#include "factrule/io.h"
#include "factrule/model.h"
#include "factrule/rules.h"

namespace httplib {
class Server;
}

namespace factrule {

struct ServiceOptions {
  // Wall-clock budget for one exact counterfactual search.
  std::chrono::milliseconds search_budget{2000};
  std::size_t default_max_card = 3;
  double fire_threshold = 0.5;
  std::size_t top_suggestions = 3;
};

struct ServiceResponse {
  int status = 200;
  Json body;
};

// HTTP explanation service over an immutable model snapshot. Handlers are
// const and share no mutable state, so concurrent requests are independent.
class ExplanationService {
 public:
  ExplanationService(LogicModel model, RuleSet rules,
                     ServiceOptions options = {});
  ExplanationService(const ExplanationService&) = delete;
  ExplanationService& operator=(const ExplanationService&) = delete;

  // Transport-independent dispatch; used by the HTTP binding and by tests.
  ServiceResponse Handle(const std::string& method, const std::string& path,
                         const std::string& body) const;

  // Registers every endpoint on `server`.
  void Mount(httplib::Server& server) const;

  const LogicModel& model() const { return *model_; }
  const RuleSet& rules() const { return rules_; }

 private:
  ServiceResponse Health() const;
  ServiceResponse Model() const;
  ServiceResponse Rules() const;
  ServiceResponse Infer(const Json& body) const;
  ServiceResponse Counterfactual(const Json& body) const;
  ServiceResponse WhatIf(const Json& body) const;

  std::unique_ptr<const LogicModel> model_;
  const RuleSet rules_;
  const ServiceOptions options_;
  std::unique_ptr<const Reasoner> reasoner_;
};

// Binds to host:port (port 0 picks a free port, reported through
// `bound_port`) and serves until `server.stop()` is called.
bool ServeBlocking(const ExplanationService& service, httplib::Server& server,
                   const std::string& host, int port, int* bound_port);

}  // namespace factrule

#endif  // FACTRULE_SERVICE_H_
