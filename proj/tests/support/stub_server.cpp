// Copyright 2026 The Faultline Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stub_server.hpp"

#include <stdexcept>

#include <httplib.h>

namespace faultline::testing {

std::string openai_body(const std::string& text, int prompt_tokens,
                        int completion_tokens) {
  nlohmann::json body = {
      {"id", "chatcmpl-stub"},
      {"object", "chat.completion"},
      {"choices",
       {{{"index", 0},
         {"message", {{"role", "assistant"}, {"content", text}}},
         {"finish_reason", "stop"}}}},
      {"usage",
       {{"prompt_tokens", prompt_tokens},
        {"completion_tokens", completion_tokens},
        {"total_tokens", prompt_tokens + completion_tokens}}}};
  return body.dump();
}

struct StubServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  Handler handler;
  mutable std::mutex mu;
  std::vector<StubRequest> seen;
};

StubServer::StubServer(Handler handler) : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  Impl* impl = impl_.get();
  impl->server.Post(".*", [impl](const httplib::Request& req,
                                 httplib::Response& res) {
    StubRequest r;
    r.path = req.path;
    for (const auto& [k, v] : req.headers) r.headers[k] = v;
    r.body = nlohmann::json::parse(req.body, nullptr, false);
    {
      std::lock_guard lock(impl->mu);
      impl->seen.push_back(r);
    }
    StubReply reply = impl->handler(r);
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  });
  impl->port = impl->server.bind_to_any_port("127.0.0.1");
  if (impl->port <= 0) throw std::runtime_error("stub server failed to bind");
  impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
  impl->server.wait_until_ready();
}

StubServer::~StubServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string StubServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port);
}

std::vector<StubRequest> StubServer::requests() const {
  std::lock_guard lock(impl_->mu);
  return impl_->seen;
}

}  // namespace faultline::testing
