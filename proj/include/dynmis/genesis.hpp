#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <variant>

#include "dynmis/dyngraph.hpp"

namespace dynmis {

struct ErdosRenyi {
  double p = 0.05;
};

struct PowerLaw {
  double exponent = 2.5;
  std::uint32_t min_degree = 2;
  std::uint32_t max_degree = 0;  // 0: n - 1
};

using Topology = std::variant<ErdosRenyi, PowerLaw>;

struct GenSpec {
  Topology topology = ErdosRenyi{};
  std::size_t n = 100;
  std::size_t events = 0;
  double add_fraction = 0.5;
  std::uint64_t seed = 1;
};

/// Throws InvalidArgument when a GenSpec field is out of range.
void validate(const GenSpec& spec);

/// G_0 for a GenSpec. Power-law graphs are realized from a sampled degree
/// sequence by stub pairing; throws DegreeSequenceInfeasible after
/// `kMaxPairingRetries` failed attempts.
Snapshot gen_initial(const GenSpec& spec);

/// Event stream of `spec.events` steps sampled against the evolving
/// snapshot: Add with probability add_fraction (uniform over absent pairs),
/// otherwise Delete (uniform over present edges).
DynamicGraph gen_events(const Snapshot& s0, const GenSpec& spec);

/// gen_initial followed by gen_events.
DynamicGraph generate(const GenSpec& spec);

inline constexpr int kMaxPairingRetries = 100;

/// Inclusive 1-based event range; empty when first > last.
struct EventRange {
  std::size_t first = 1;
  std::size_t last = 0;

  bool empty() const noexcept { return first > last; }
  std::size_t size() const noexcept { return empty() ? 0 : last - first + 1; }
  bool operator==(const EventRange&) const = default;
};

struct SplitSpec {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

struct Splits {
  EventRange train;
  EventRange val;
  EventRange test;
};

/// Chronological split of 1..horizon; boundaries at the floor of the
/// cumulative fractions.
Splits split(std::size_t horizon, const SplitSpec& sp);

/// Parses "70:15:15" style ratios (normalized to sum 1).
SplitSpec parse_split(std::string_view text);

/// Named size presets: "small", "medium", "large".
struct SizePreset {
  std::size_t n;
  std::size_t events;
};
SizePreset size_preset(std::string_view name);

}  // namespace dynmis
