#pragma once

// Context rows: one-hot action (8) followed by the encoded next state (14).
// This layout is shared by the agent, the dataset files and the learned
// inference wire protocol.

#include "alchemy_ps/env.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace alchemy_ps {

inline constexpr int kContextLayoutVersion = 1;

using ContextRow = std::array<std::uint8_t, kRowWidth>;

inline ContextRow make_context_row(EnvAction action, const EnvState& next) {
  ContextRow row{};
  row[action.number - 1] = 1;
  const StateRow s = encode_state(next);
  std::copy(s.begin(), s.end(), row.begin() + kNumEnvActions);
  return row;
}

/// Append-only history of (a_t, s_{t+1}) rows.
class Context {
 public:
  void append(EnvAction action, const EnvState& next) { rows_.push_back(make_context_row(action, next)); }
  void clear() { rows_.clear(); }

  const std::vector<ContextRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<ContextRow> rows_;
};

/// Stone vertex embedded in a context row.
inline VertexId row_stone(const ContextRow& row) {
  return vertex_index(row[kNumEnvActions + 0], row[kNumEnvActions + 1], row[kNumEnvActions + 2]);
}

/// The action recorded in a row, or nullopt if the one-hot block is invalid.
inline std::optional<EnvAction> row_action(const ContextRow& row) {
  int found = -1;
  for (int i = 0; i < kNumEnvActions; ++i) {
    if (row[i] > 1) return std::nullopt;
    if (row[i] == 1) {
      if (found >= 0) return std::nullopt;
      found = i;
    }
  }
  if (found < 0) return std::nullopt;
  return EnvAction(found + 1);
}

/// True when the row has a one-hot action, 0/1 flags and a one-hot brightness.
inline bool row_well_formed(const ContextRow& row) {
  if (!row_action(row)) return false;
  for (int i = kNumEnvActions; i < kNumEnvActions + 10; ++i)
    if (row[i] > 1) return false;
  int hot = 0;
  for (int i = kNumEnvActions + 10; i < kRowWidth; ++i) {
    if (row[i] > 1) return false;
    hot += row[i];
  }
  return hot == 1;
}

}  // namespace alchemy_ps
