#pragma once

// Client side of the learned-inference wire protocol.
//
// Newline-delimited JSON, one request per time step:
//   request  {"id":int,"rows":[[22 numbers], ...]}
//   response {"id":int,"edge_probs":[12 numbers],"vertex_probs":[8 numbers]}
// A server may instead answer {"id":int,"error":"..."}.

#include "alchemy_ps/belief.hpp"
#include "alchemy_ps/context.hpp"
#include "alchemy_ps/line_channel.hpp"

#include "json.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

namespace alchemy_ps {

struct LearnedReply {
  std::uint64_t id = 0;
  EdgeProbs edge_probs;
  std::array<double, kNumVertices> vertex_probs{};
};

inline std::string encode_request(std::uint64_t id, std::span<const ContextRow> rows) {
  std::string out = "{\"id\":" + std::to_string(id) + ",\"rows\":[";
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (t) out += ',';
    out += '[';
    for (int i = 0; i < kRowWidth; ++i) {
      if (i) out += ',';
      out += static_cast<char>('0' + rows[t][i]);
    }
    out += ']';
  }
  out += "]}";
  return out;
}

namespace detail {

template <std::size_t N>
std::array<double, N> probability_array(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array() || it->size() != N)
    throw ProtocolError(std::string("reply field '") + key + "' must be an array of " + std::to_string(N) +
                        " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    const auto& x = (*it)[i];
    if (!x.is_number()) throw ProtocolError(std::string("non-numeric entry in '") + key + "'");
    out[i] = x.get<double>();
    if (!std::isfinite(out[i]) || out[i] < 0.0 || out[i] > 1.0)
      throw ProtocolError(std::string("entry of '") + key + "' outside [0,1]");
  }
  return out;
}

}  // namespace detail

/// Parses and validates one reply line for request `expected_id`.
inline LearnedReply decode_reply(const std::string& line, std::uint64_t expected_id) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("malformed reply: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("reply is not a JSON object");
  auto id = j.find("id");
  if (id == j.end() || !id->is_number_integer()) throw ProtocolError("reply has no integer id");
  if (id->get<std::int64_t>() != static_cast<std::int64_t>(expected_id))
    throw ProtocolError("reply id " + id->dump() + " does not match request id " + std::to_string(expected_id));
  if (auto err = j.find("error"); err != j.end())
    throw ProtocolError("inference server error: " + (err->is_string() ? err->get<std::string>() : err->dump()));

  LearnedReply r;
  r.id = expected_id;
  r.edge_probs.p = detail::probability_array<kNumEdges>(j, "edge_probs");
  r.vertex_probs = detail::probability_array<kNumVertices>(j, "vertex_probs");
  double total = 0.0;
  for (double p : r.vertex_probs) total += p;
  if (std::abs(total - 1.0) > 1e-4) throw ProtocolError("vertex_probs do not sum to 1");
  return r;
}

/// Belief engine backed by an external inference server.
class ExternalLearnedEngine final : public BeliefEngine {
 public:
  ExternalLearnedEngine(std::unique_ptr<LineChannel> channel, RewardProbs reward,
                        std::chrono::milliseconds timeout = std::chrono::seconds(30))
      : channel_(std::move(channel)), reward_(reward), timeout_(timeout) {}

  void reset(const EnvState&) override {
    context_.clear();
    cached_.reset();
  }

  void observe(const EnvState&, EnvAction action, const EnvState& next) override {
    context_.append(action, next);
    cached_.reset();
  }

  BeliefSnapshot snapshot() override {
    if (!cached_) {
      const std::uint64_t id = next_id_++;
      channel_->write_line(encode_request(id, context_.rows()));
      const LearnedReply reply = decode_reply(channel_->read_line(timeout_), id);
      int best = 0;
      for (int v = 1; v < kNumVertices; ++v)
        if (reply.vertex_probs[v] > reply.vertex_probs[best]) best = v;
      cached_ = BeliefSnapshot{reply.edge_probs, reward_, VertexId(best)};
    }
    return *cached_;
  }

  EngineKind kind() const override { return EngineKind::ExternalLearned; }
  const Context& context() const { return context_; }

 private:
  std::unique_ptr<LineChannel> channel_;
  RewardProbs reward_;
  std::chrono::milliseconds timeout_;
  Context context_;
  std::optional<BeliefSnapshot> cached_;
  std::uint64_t next_id_ = 0;
};

}  // namespace alchemy_ps
