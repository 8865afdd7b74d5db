#pragma once

// Random CAV/HDV sequences and their decomposition into mixed platoons,
// independent CAVs and independent HDVs.
//
// Vehicle ids run 1..N against the direction of travel; id 0 is the head
// vehicle, which never belongs to a segment.

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "mixtraffic/topology.hpp"

namespace mixtraffic {

enum class VehicleClass { Cav, Hdv };

inline std::string_view to_string(VehicleClass c) { return c == VehicleClass::Cav ? "CAV" : "HDV"; }

struct TrafficComposition {
  std::vector<VehicleClass> classes;  // classes[k] is vehicle id k + 1
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(classes.size()); }
  VehicleClass of(int id) const { return classes.at(static_cast<std::size_t>(id - 1)); }
};

enum class SegmentKind { MixedPlatoon, IndependentCav, IndependentHdv };

struct Segment {
  SegmentKind kind;
  std::vector<int> members;  // vehicle ids, front to back

  int size() const { return static_cast<int>(members.size()); }
  bool operator==(const Segment&) const = default;
};

struct PlatoonPartition {
  std::vector<Segment> segments;
  bool operator==(const PlatoonPartition&) const = default;
};

/// Probability weights of each transfer-function type in the mixed-traffic
/// product. They are not normalized and need not sum to one.
struct SegmentProbabilities {
  int m_max = 0;
  double p_size_max = 0;               // full-size platoon
  std::map<int, double> p_size;        // m in [2, m_max - 1]
  double p_cav = 0;
  double p_hdv = 0;
};

/// Each vehicle is independently a CAV with probability p. Deterministic in
/// (n, p, seed) on every platform.
TrafficComposition sample_composition(int n, double p, std::uint64_t seed);

/// Builds a composition from a string such as "HHCH" (head excluded).
TrafficComposition composition_from_string(std::string_view classes);

/// Greedy front-to-back grouping. Under MPF a CAV takes up to m_max - 1
/// unclaimed HDVs directly ahead of it; under MSL, directly behind. A CAV that
/// gets no HDV is an independent CAV, an unclaimed HDV is an independent HDV.
PlatoonPartition partition(const TrafficComposition& c, Topology topology, int m_max);

/// Strategy-level partition; CACC produces independent vehicles only.
PlatoonPartition partition(const TrafficComposition& c, Strategy strategy, int m_max);

SegmentProbabilities segment_probabilities(double p, int m_max);

}  // namespace mixtraffic
