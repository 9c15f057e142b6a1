#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sunfleet/geometry.hpp"

namespace sunfleet {

inline constexpr double kSpeedOfLight = 299792458.0;

// OFDMA air interface and coverage geometry of the serving UAVs.
struct RadioParams {
  double carrier_hz = 2e9;
  double tx_psd_w_per_hz = 4e-8;        // ~0.36 W over 9 MHz
  double noise_psd_w_per_hz = 3.98e-21; // -174 dBm/Hz
  double rb_bandwidth_hz = 180e3;
  int rbs_per_uav = 50;
  double los_excess_db = 1.0;
  double coverage_radius_m = 300.0;
  double serve_altitude_m = 300.0;
  double max_step_m = 50.0;

  void validate() const;
  friend bool operator==(const RadioParams&, const RadioParams&) = default;
};

struct Placement {
  std::vector<Point> positions;

  std::size_t size() const { return positions.size(); }
  friend bool operator==(const Placement&, const Placement&) = default;
};

struct Association {
  static constexpr int kUnassigned = -1;

  std::vector<int> server;   // per user: UAV index or kUnassigned
  std::vector<int> rbs;      // per user: RBs granted (0 if unassigned)
  std::vector<int> rb_used;  // per UAV

  int served() const;
};

// Free-space path loss plus line-of-sight excess, in dB. d is the 3D distance.
double path_loss_db(double d, const RadioParams& r);

// Channel gain G = 10^(-PL/20).
double channel_gain(double d, const RadioParams& r);

// 3D UAV-user distance for a UAV hovering at the serving altitude.
double link_distance(const Point& uav, const Point& user, const RadioParams& r);

bool covers(const Point& uav, const Point& user, const RadioParams& r);

// SINR of `user` served by placement[uav]; interference comes from every other
// UAV whose disk covers the user.
double sinr(const Point& user, std::size_t uav, const Placement& placement, const RadioParams& r);

// Smallest RB count meeting the rate requirement, or nullopt if it exceeds the
// per-UAV budget. Throws DomainError when the user is outside the UAV's disk.
std::optional<int> required_rbs(const Point& user, std::size_t uav, const Placement& placement,
                                const RadioParams& r, double rate_bps);

// Two-stage association: best-SINR requests first, then rejected users walk
// down their covering UAVs in SINR order until admitted or exhausted.
Association associate_users(const Placement& placement, const UserField& users, const RadioParams& r);

struct PlacementResult {
  Placement placement;
  int served = 0;
};

// Local-search solution of the per-slot placement problem. A warm start of
// fewer than n_srv positions is completed by greedy seeding.
PlacementResult optimize_placement(const UserField& users, int n_srv, const RadioParams& r,
                                   const Area& area, std::uint64_t seed,
                                   const Placement* warm_start = nullptr);

inline constexpr std::uint64_t kBruteForceBudget = 20'000'000;

// Exact maximum served count over all placements on a square grid (n_srv <= 2).
// Throws SizeError when the enumeration exceeds kBruteForceBudget.
int brute_force_placement(const UserField& users, int n_srv, double grid_step, const RadioParams& r,
                          const Area& area);

}  // namespace sunfleet
