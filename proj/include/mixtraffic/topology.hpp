#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace mixtraffic {

/// Information flow topology of a mixed platoon.
enum class Topology { Mpf, Msl };

/// Control strategy for the CAVs in a scenario. `Cacc` runs every CAV as an
/// independent CACC follower with no platoons.
enum class Strategy { Cacc, Mpf, Msl };

inline std::string_view to_string(Topology t) { return t == Topology::Mpf ? "MPF" : "MSL"; }

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Cacc: return "CACC";
    case Strategy::Mpf: return "MPF";
    case Strategy::Msl: return "MSL";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "CACC") return Strategy::Cacc;
  if (name == "MPF") return Strategy::Mpf;
  if (name == "MSL") return Strategy::Msl;
  return std::nullopt;
}

/// Platoon topology for a strategy; empty for CACC.
inline std::optional<Topology> platoon_topology(Strategy s) {
  if (s == Strategy::Mpf) return Topology::Mpf;
  if (s == Strategy::Msl) return Topology::Msl;
  return std::nullopt;
}

}  // namespace mixtraffic
