#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sunfleet/energy.hpp"
#include "sunfleet/geometry.hpp"
#include "sunfleet/radio.hpp"
#include "sunfleet/reward.hpp"

namespace sunfleet {

inline constexpr int kScenarioFormatVersion = 1;

struct Hotspot {
  double x = 0.0;
  double y = 0.0;
  double sigma = 80.0;

  friend bool operator==(const Hotspot&, const Hotspot&) = default;
};

struct HourlyDemand {
  int n_users = 0;
  double hotspot_fraction = 0.0;
  std::vector<Hotspot> hotspots;
  double rate_bps = 5e5;

  void validate() const;
  friend bool operator==(const HourlyDemand&, const HourlyDemand&) = default;
};

struct Scenario {
  Area area;
  int horizon = 24;
  double slot_seconds = 3600.0;
  int start_hour = 0;  // hour of day of slot 0
  int fleet_size = 3;
  Altitudes altitudes;
  std::vector<HourlyDemand> demand;
  PhysicsParams physics;
  RadioParams radio;
  SolarParams solar;
  RewardParams reward;
  double p_min = 0.85;
  std::uint64_t seed = 1;

  // Hour of day at which slot t starts.
  double hour_of_day(int t) const;
  int users_at(int t) const { return demand.at(static_cast<std::size_t>(t)).n_users; }

  // Throws InputError naming the violated invariant.
  void validate() const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Scenario with Table-style defaults, the shipped demand table and `fleet_size` UAVs.
Scenario default_scenario(int fleet_size = 3, int horizon = 24);

// Shipped hourly user counts for a weekday; a window of length T centred on midday.
std::vector<HourlyDemand> default_demand_profile(int horizon, const Area& area = {});
int default_start_hour(int horizon);

Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
std::string format_scenario(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

// Users for one slot; a pure function of its arguments.
UserField generate_users(const HourlyDemand& demand, const Area& area, std::uint64_t seed);

// Deterministic 64-bit mixing for deriving sub-seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace sunfleet
