#include "sunfleet/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sunfleet/error.hpp"

namespace sunfleet {

namespace {

constexpr double kSecondsPerHour = 3600.0;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " is not finite");
}

// Running battery state while integrating the phases of a slot.
struct Battery {
  double capacity;
  double level;
  SlotEnergyResult* out;

  // Constant harvest and draw over `seconds`. The net rate has a fixed sign, so
  // the battery either fills to capacity or drains to zero at most once.
  void run(double harvest_w, double draw_w, double seconds) {
    if (seconds <= 0.0) return;
    const double hours = seconds / kSecondsPerHour;
    out->harvested_wh += harvest_w * hours;
    out->consumed_wh += draw_w * hours;
    const double net = (harvest_w - draw_w) * hours;
    if (net >= 0.0) {
      const double room = capacity - level;
      if (net <= room) {
        level += net;
      } else {
        out->discarded_harvest_wh += net - room;
        level = capacity;
      }
    } else {
      const double loss = -net;
      if (loss <= level) {
        level -= loss;
      } else {
        out->unmet_consumption_wh += loss - level;
        level = 0.0;
      }
    }
  }
};

}  // namespace

Level level_from_code(int c) {
  if (c < 0 || c >= kLevelCount) throw InputError("action code out of {0,1,2}: " + std::to_string(c));
  return static_cast<Level>(c);
}

std::string_view to_string(Level l) {
  switch (l) {
    case Level::Ground: return "ground";
    case Level::Serving: return "serving";
    case Level::Charging: return "charging";
  }
  return "?";
}

double Altitudes::of(Level l) const {
  switch (l) {
    case Level::Ground: return ground;
    case Level::Serving: return serving;
    case Level::Charging: return charging;
  }
  return ground;
}

double PhysicsParams::disk_area() const {
  return rotor_count * std::numbers::pi * rotor_radius_m * rotor_radius_m;
}

double PhysicsParams::hover_induced_velocity() const {
  return std::sqrt(weight_n / (2.0 * air_density * disk_area()));
}

void PhysicsParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string("physics.") + name + " must be > 0");
  };
  positive(weight_n, "weight");
  positive(air_density, "air_density");
  if (rotor_count < 1) throw InputError("physics.rotor_count must be >= 1");
  positive(rotor_radius_m, "rotor_radius");
  positive(profile_drag_coeff, "profile_drag");
  positive(solidity, "solidity");
  positive(tip_speed, "tip_speed");
  positive(max_level_speed, "max_level_speed");
  positive(climb_speed, "climb_speed");
  positive(descent_speed, "descent_speed");
  if (!(tx_power_w >= 0.0)) throw InputError("physics.tx_power must be >= 0");
  positive(static_power_w, "static_power");
  positive(battery_capacity_wh, "battery_capacity");
}

void SolarParams::validate() const {
  if (!(max_intensity > 0.0)) throw InputError("solar.max_intensity must be > 0");
  if (!(intensity_threshold > 0.0)) throw InputError("solar.intensity_threshold must be > 0");
  if (!(panel_area_m2 > 0.0)) throw InputError("solar.panel_area must be > 0");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InputError("solar.efficiency out of (0,1]");
}

double kinematic_power(double v_lv, double v_vt, const PhysicsParams& p) {
  require_finite(v_lv, "level speed");
  require_finite(v_vt, "vertical speed");
  constexpr double slack = 1e-12;
  if (std::abs(v_lv) > p.max_level_speed + slack) throw DomainError("level speed exceeds max_level_speed");
  if (v_vt > p.climb_speed + slack || v_vt < -p.descent_speed - slack) {
    throw DomainError("vertical speed outside [-descent_speed, climb_speed]");
  }
  const double area = p.disk_area();
  const double vh = p.hover_induced_velocity();
  const double v2 = v_lv * v_lv;
  const double level = p.weight_n * p.weight_n / (std::numbers::sqrt2 * p.air_density * area) /
                       std::sqrt(v2 + std::sqrt(v2 * v2 + 4.0 * std::pow(vh, 4)));
  const double vertical = p.weight_n * v_vt;
  const double drag = 0.125 * p.profile_drag_coeff * p.air_density * p.blade_area() * std::pow(p.tip_speed, 3);
  return std::max(0.0, level + vertical + drag);
}

double total_power(double v_lv, double v_vt, const PhysicsParams& p) {
  return kinematic_power(v_lv, v_vt, p) + p.tx_power_w + p.static_power_w;
}

double solar_intensity(double hour, const SolarParams& s) {
  require_finite(hour, "hour");
  if (hour < 0.0 || hour >= 24.0) throw DomainError("hour outside [0, 24)");
  const double shape = -hour * hour / 36.0 + 2.0 * hour / 3.0 - 3.0;
  return std::max(0.0, s.max_intensity * shape);
}

double harvest_power(double intensity, const SolarParams& s) {
  require_finite(intensity, "intensity");
  if (intensity < 0.0) throw DomainError("negative radiation intensity");
  if (intensity == 0.0) return 0.0;
  if (intensity < s.intensity_threshold) {
    return s.panel_area_m2 * (s.efficiency / s.intensity_threshold) * intensity * intensity;
  }
  return s.panel_area_m2 * s.efficiency * intensity;
}

double min_energy(Level action, const PhysicsParams& p, const Altitudes& alt) {
  const double rise = alt.charging - alt.of(action);
  if (rise <= 0.0) return 0.0;
  return rise / p.climb_speed * total_power(0.0, p.climb_speed, p) / kSecondsPerHour;
}

SlotEnergyResult slot_transition(Level prev, Level action, double residue_wh, double hour,
                                 double slot_seconds, const PhysicsParams& p,
                                 const SolarParams& s, const Altitudes& alt) {
  if (!(residue_wh >= 0.0 && residue_wh <= p.battery_capacity_wh)) {
    throw DomainError("battery residue outside [0, capacity]");
  }
  SlotEnergyResult out;
  out.new_level = action;

  const double dh = alt.of(action) - alt.of(prev);
  double transit_power = 0.0;
  if (dh > 0.0) {
    out.transit_seconds = dh / p.climb_speed;
    transit_power = total_power(0.0, p.climb_speed, p);
  } else if (dh < 0.0) {
    out.transit_seconds = -dh / p.descent_speed;
    transit_power = total_power(0.0, -p.descent_speed, p);
  }
  if (out.transit_seconds > slot_seconds) {
    throw DomainError("vertical transit does not fit in one slot");
  }

  double dwell_draw = 0.0;
  double dwell_harvest = 0.0;
  switch (action) {
    case Level::Ground:
      dwell_draw = p.static_power_w;
      break;
    case Level::Serving:
      dwell_draw = hover_power(p);
      break;
    case Level::Charging:
      dwell_draw = hover_power(p);
      dwell_harvest = harvest_power(solar_intensity(hour, s), s);
      break;
  }

  Battery battery{p.battery_capacity_wh, residue_wh, &out};
  battery.run(0.0, transit_power, out.transit_seconds);
  battery.run(dwell_harvest, dwell_draw, slot_seconds - out.transit_seconds);
  out.new_residue_wh = battery.level;
  return out;
}

}  // namespace sunfleet
