#pragma once

#include <string_view>

#include "are/prompts.hpp"
#include "are/providers.hpp"

namespace are {

/// Chat access for pipeline stages: renders a prompt task, calls the provider
/// and books the exchange on the caller's counters.
class LlmClient {
 public:
  LlmClient(ChatProvider& chat, CounterSink* counters = nullptr, int max_output_tokens = 512,
            double temperature = 0.0)
      : chat_(chat), counters_(counters), max_tokens_(max_output_tokens), temperature_(temperature) {}

  ChatResponse complete(std::string_view task, const Json& vars) {
    return send(prompts::render(task, vars, max_tokens_, temperature_));
  }

  ChatResponse send(const ChatRequest& req) {
    auto resp = chat_.chat(req);
    if (counters_ != nullptr) counters_->add_chat(resp);
    return resp;
  }

 private:
  ChatProvider& chat_;
  CounterSink* counters_;
  int max_tokens_;
  double temperature_;
};

}  // namespace are
