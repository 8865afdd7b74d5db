#include "mixtraffic/composition.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace mixtraffic {

TrafficComposition sample_composition(int n, double p, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_composition: n must be at least 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_composition: p must lie in [0, 1]");
  // mt19937_64 output is fixed by the standard; distributions are not, so the
  // uniform draw is built by hand from the top 53 bits.
  std::mt19937_64 rng(seed);
  TrafficComposition c;
  c.seed = seed;
  c.classes.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    c.classes.push_back(u < p ? VehicleClass::Cav : VehicleClass::Hdv);
  }
  return c;
}

TrafficComposition composition_from_string(std::string_view classes) {
  TrafficComposition c;
  for (char ch : classes) {
    if (ch == 'C' || ch == 'c') {
      c.classes.push_back(VehicleClass::Cav);
    } else if (ch == 'H' || ch == 'h') {
      c.classes.push_back(VehicleClass::Hdv);
    } else {
      throw std::invalid_argument(std::string("composition_from_string: unexpected character '") + ch + "'");
    }
  }
  return c;
}

PlatoonPartition partition(const TrafficComposition& c, Topology topology, int m_max) {
  if (m_max < 2) throw std::invalid_argument("partition: m_max must be at least 2");
  const int n = c.size();
  // owner[id] = id of the CAV that claimed vehicle id, 0 if unclaimed.
  std::vector<int> owner(static_cast<std::size_t>(n + 1), 0);
  std::vector<std::vector<int>> claimed(static_cast<std::size_t>(n + 1));

  for (int id = 1; id <= n; ++id) {
    if (c.of(id) != VehicleClass::Cav) continue;
    const int dir = topology == Topology::Mpf ? -1 : 1;
    auto& group = claimed[static_cast<std::size_t>(id)];
    for (int j = id + dir; j >= 1 && j <= n && static_cast<int>(group.size()) < m_max - 1; j += dir) {
      if (c.of(j) != VehicleClass::Hdv || owner[static_cast<std::size_t>(j)] != 0) break;
      owner[static_cast<std::size_t>(j)] = id;
      group.push_back(j);
    }
  }

  PlatoonPartition out;
  for (int id = 1; id <= n; ++id) {
    if (c.of(id) == VehicleClass::Hdv) {
      if (owner[static_cast<std::size_t>(id)] == 0) out.segments.push_back({SegmentKind::IndependentHdv, {id}});
      // Claimed HDVs are emitted with their CAV. Under MPF the CAV comes
      // after them, under MSL before, so emission happens at the CAV.
      continue;
    }
    const auto& group = claimed[static_cast<std::size_t>(id)];
    if (group.empty()) {
      out.segments.push_back({SegmentKind::IndependentCav, {id}});
      continue;
    }
    Segment seg{SegmentKind::MixedPlatoon, {}};
    if (topology == Topology::Mpf) {
      seg.members.assign(group.rbegin(), group.rend());
      seg.members.push_back(id);
    } else {
      seg.members.push_back(id);
      seg.members.insert(seg.members.end(), group.begin(), group.end());
    }
    out.segments.push_back(std::move(seg));
  }
  return out;
}

PlatoonPartition partition(const TrafficComposition& c, Strategy strategy, int m_max) {
  if (auto topo = platoon_topology(strategy)) return partition(c, *topo, m_max);
  PlatoonPartition out;
  for (int id = 1; id <= c.size(); ++id) {
    out.segments.push_back(
        {c.of(id) == VehicleClass::Cav ? SegmentKind::IndependentCav : SegmentKind::IndependentHdv, {id}});
  }
  return out;
}

SegmentProbabilities segment_probabilities(double p, int m_max) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("segment_probabilities: p must lie in [0, 1]");
  if (m_max < 2) throw std::invalid_argument("segment_probabilities: m_max must be at least 2");
  const double q = 1.0 - p;
  SegmentProbabilities s;
  s.m_max = m_max;
  s.p_size_max = p * std::pow(q, m_max - 1);
  for (int m = 2; m < m_max; ++m) s.p_size[m] = p * p * std::pow(q, m - 1);
  s.p_cav = p * p;
  s.p_hdv = std::pow(q, m_max);
  return s;
}

}  // namespace mixtraffic
