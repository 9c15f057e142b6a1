#pragma once

#include <cstdint>
#include <string_view>

namespace sunfleet {

// Operational level of a UAV; doubles as the per-UAV action code (0, 1, 2).
enum class Level : std::uint8_t { Ground = 0, Serving = 1, Charging = 2 };

inline constexpr int kLevelCount = 3;

constexpr int code(Level l) { return static_cast<int>(l); }
Level level_from_code(int c);
std::string_view to_string(Level l);

struct Altitudes {
  double ground = 0.0;
  double serving = 300.0;
  double charging = 1400.0;

  double of(Level l) const;
  friend bool operator==(const Altitudes&, const Altitudes&) = default;
};

// Airframe, rotor and battery parameters. Defaults follow the reference
// multirotor; rotor_count is our choice since only the disk radius is given.
struct PhysicsParams {
  double weight_n = 5.0 * 9.8;
  double air_density = 1.225;
  int rotor_count = 4;
  double rotor_radius_m = 0.3;
  double profile_drag_coeff = 5e-4;
  double solidity = 0.056;
  double tip_speed = 150.0;
  double max_level_speed = 6.0;
  double climb_speed = 4.0;
  double descent_speed = 4.0;
  double tx_power_w = 0.0;
  double static_power_w = 5.0;
  double battery_capacity_wh = 600.0;

  double disk_area() const;
  double blade_area() const { return solidity * disk_area(); }
  // Induced velocity in hover, V_h = sqrt(W / (2 rho A)).
  double hover_induced_velocity() const;

  void validate() const;
  friend bool operator==(const PhysicsParams&, const PhysicsParams&) = default;
};

struct SolarParams {
  double max_intensity = 2000.0;      // W/m^2 above the clouds
  double intensity_threshold = 150.0; // K_c, W/m^2
  double panel_area_m2 = 1.0;
  double efficiency = 0.25;

  void validate() const;
  friend bool operator==(const SolarParams&, const SolarParams&) = default;
};

// Rotorcraft propulsion power (W) at level speed v_lv and vertical speed v_vt
// (positive climbing). Clamped at zero.
double kinematic_power(double v_lv, double v_vt, const PhysicsParams& p);

// Propulsion plus transmit and on-board power (W).
double total_power(double v_lv, double v_vt, const PhysicsParams& p);

inline double hover_power(const PhysicsParams& p) { return total_power(0.0, 0.0, p); }

// Average solar intensity above the clouds at hour-of-day t in [0, 24).
double solar_intensity(double hour, const SolarParams& s);

// Harvested panel power (W) for a given radiation intensity.
double harvest_power(double intensity, const SolarParams& s);

// Energy (Wh) needed to climb from the level reached by `action` up to the
// charging altitude.
double min_energy(Level action, const PhysicsParams& p, const Altitudes& alt);

struct SlotEnergyResult {
  double harvested_wh = 0.0;          // gross harvest during the dwell at charging altitude
  double discarded_harvest_wh = 0.0;  // part of harvested_wh lost to a full battery
  double consumed_wh = 0.0;           // gross consumption over the slot
  double unmet_consumption_wh = 0.0;  // part of consumed_wh the empty battery could not supply
  double new_residue_wh = 0.0;
  Level new_level = Level::Ground;
  double transit_seconds = 0.0;

  double stored_harvest_wh() const { return harvested_wh - discarded_harvest_wh; }
  double supplied_consumption_wh() const { return consumed_wh - unmet_consumption_wh; }
};

// One slot of battery accounting: vertical transit from `prev` to `action`
// followed by a dwell at the target level. Satisfies
//   new - residue == harvested - discarded - consumed + unmet.
SlotEnergyResult slot_transition(Level prev, Level action, double residue_wh, double hour,
                                 double slot_seconds, const PhysicsParams& p,
                                 const SolarParams& s, const Altitudes& alt);

}  // namespace sunfleet
