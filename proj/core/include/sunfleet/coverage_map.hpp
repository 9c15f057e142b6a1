#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sunfleet/radio.hpp"
#include "sunfleet/scenario.hpp"

namespace sunfleet {

// Per-slot table: number of serving UAVs -> maximum users served.
class CoverageMap {
 public:
  CoverageMap() = default;
  CoverageMap(int horizon, int fleet_size);

  int horizon() const { return static_cast<int>(served_.size()); }
  int fleet_size() const { return fleet_size_; }

  int served(int t, int n_srv) const;
  void set_served(int t, int n_srv, int value);
  const std::vector<int>& row(int t) const { return served_.at(static_cast<std::size_t>(t)); }

  // Placement that achieved served(t, n); empty when the map was ingested from CSV.
  const Placement& placement(int t, int n_srv) const;
  void set_placement(int t, int n_srv, Placement p);
  bool has_placements() const { return !placements_.empty(); }

  // Replaces every row by its running maximum; a raised entry inherits the
  // placement of the entry it copies.
  void make_monotone();

  // Rows nondecreasing, zero at n_srv = 0 and bounded by the scenario's users.
  void validate_against(const Scenario& s) const;

  friend bool operator==(const CoverageMap&, const CoverageMap&) = default;

 private:
  int fleet_size_ = 0;
  std::vector<std::vector<int>> served_;
  std::vector<std::vector<Placement>> placements_;
};

// Solves the placement problem for every slot and every fleet count 0..N.
CoverageMap build_coverage_map(const Scenario& scenario, std::uint64_t seed);

// Users of slot t for a given map seed.
UserField slot_users(const Scenario& scenario, int t, std::uint64_t seed);

// CSV with header "hour,n_srv,served_users" and T*(N+1) rows.
void write_coverage_csv(const CoverageMap& map, const std::filesystem::path& path);
CoverageMap read_coverage_csv(const std::filesystem::path& path);

// JSON document keyed by (hour, n_srv).
void write_placements_json(const CoverageMap& map, const std::filesystem::path& path);

}  // namespace sunfleet
