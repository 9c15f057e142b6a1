#include "sunfleet/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "sunfleet/error.hpp"

namespace sunfleet {

namespace {

// Weekday user counts by hour of day, version 1 of the shipped table.
constexpr std::array<int, 24> kDemandTable = {14, 10, 8,  6,  6,  8,  14, 26, 44, 62, 78, 90,
                                              84, 80, 88, 96, 86, 66, 52, 42, 34, 28, 22, 18};
constexpr double kDefaultHotspotFraction = 0.6;
// Hotspots far outside the area fall back to clamping after this many draws.
constexpr int kMaxResamples = 1000;

std::vector<Hotspot> default_hotspots(const Area& area) {
  const double sigma = 0.08 * std::min(area.width, area.height);
  return {{0.3 * area.width, 0.35 * area.height, sigma}, {0.7 * area.width, 0.65 * area.height, sigma}};
}

// --- YAML reading helpers --------------------------------------------------

std::string where(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.line < 0) return "";
  return " (line " + std::to_string(mark.line + 1) + ")";
}

class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsMap()) throw InputError(path_ + ": expected a mapping" + where(node_));
  }

  bool has(const char* key) const { return node_ && node_[key]; }

  template <typename T>
  void read(const char* key, T& value) {
    seen_.insert(key);
    if (!node_) return;
    const YAML::Node child = node_[key];
    if (!child) return;
    try {
      value = child.as<T>();
    } catch (const YAML::Exception&) {
      throw InputError(field(key) + ": invalid value '" + scalar(child) + "'" + where(child));
    }
  }

  YAML::Node child(const char* key) {
    seen_.insert(key);
    return node_ ? node_[key] : YAML::Node();
  }

  void reject_unknown() const {
    if (!node_) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.contains(key)) throw InputError(field(key) + ": unknown field" + where(kv.first));
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  static std::string scalar(const YAML::Node& n) { return n.IsScalar() ? n.Scalar() : "<non-scalar>"; }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

HourlyDemand read_demand(const YAML::Node& node, const std::string& path) {
  HourlyDemand d;
  d.hotspot_fraction = kDefaultHotspotFraction;
  Section sec(node, path);
  sec.read("users", d.n_users);
  sec.read("hotspot_fraction", d.hotspot_fraction);
  sec.read("rate", d.rate_bps);
  const YAML::Node hs = sec.child("hotspots");
  if (hs) {
    if (!hs.IsSequence()) throw InputError(path + ".hotspots: expected a list" + where(hs));
    for (std::size_t i = 0; i < hs.size(); ++i) {
      Hotspot h;
      Section hsec(hs[i], path + ".hotspots[" + std::to_string(i) + "]");
      hsec.read("x", h.x);
      hsec.read("y", h.y);
      hsec.read("sigma", h.sigma);
      hsec.reject_unknown();
      d.hotspots.push_back(h);
    }
  }
  sec.reject_unknown();
  return d;
}

Scenario scenario_from_yaml(const YAML::Node& root) {
  if (!root || !root.IsMap()) throw InputError("scenario: top level must be a mapping");
  Section top(root, "");

  int version = kScenarioFormatVersion;
  top.read("version", version);
  if (version != kScenarioFormatVersion) {
    throw InputError("version: unsupported scenario format " + std::to_string(version));
  }

  Scenario s;
  top.read("seed", s.seed);
  top.read("horizon", s.horizon);
  double slot_hours = 1.0;
  top.read("slot_hours", slot_hours);
  s.slot_seconds = slot_hours * 3600.0;
  s.start_hour = default_start_hour(s.horizon);
  top.read("start_hour", s.start_hour);
  top.read("fleet_size", s.fleet_size);
  top.read("p_min", s.p_min);

  Section area(top.child("area"), "area");
  area.read("width", s.area.width);
  area.read("height", s.area.height);
  area.reject_unknown();

  Section alt(top.child("altitudes"), "altitudes");
  alt.read("ground", s.altitudes.ground);
  alt.read("serving", s.altitudes.serving);
  alt.read("charging", s.altitudes.charging);
  alt.reject_unknown();

  Section ph(top.child("physics"), "physics");
  auto& p = s.physics;
  ph.read("weight", p.weight_n);
  ph.read("air_density", p.air_density);
  ph.read("rotor_count", p.rotor_count);
  ph.read("rotor_radius", p.rotor_radius_m);
  ph.read("profile_drag", p.profile_drag_coeff);
  ph.read("solidity", p.solidity);
  ph.read("tip_speed", p.tip_speed);
  ph.read("max_level_speed", p.max_level_speed);
  ph.read("climb_speed", p.climb_speed);
  ph.read("descent_speed", p.descent_speed);
  ph.read("tx_power", p.tx_power_w);
  ph.read("static_power", p.static_power_w);
  ph.read("battery_capacity", p.battery_capacity_wh);
  ph.reject_unknown();

  Section so(top.child("solar"), "solar");
  so.read("max_intensity", s.solar.max_intensity);
  so.read("intensity_threshold", s.solar.intensity_threshold);
  so.read("panel_area", s.solar.panel_area_m2);
  so.read("efficiency", s.solar.efficiency);
  so.reject_unknown();

  Section ra(top.child("radio"), "radio");
  auto& r = s.radio;
  ra.read("carrier_frequency", r.carrier_hz);
  ra.read("tx_psd", r.tx_psd_w_per_hz);
  ra.read("noise_psd", r.noise_psd_w_per_hz);
  ra.read("rb_bandwidth", r.rb_bandwidth_hz);
  ra.read("rbs_per_uav", r.rbs_per_uav);
  ra.read("los_excess_db", r.los_excess_db);
  ra.read("coverage_radius", r.coverage_radius_m);
  ra.read("max_step", r.max_step_m);
  ra.reject_unknown();
  r.serve_altitude_m = s.altitudes.serving;

  Section rw(top.child("reward"), "reward");
  rw.read("penalty_sustainability", s.reward.penalty_sustainability);
  rw.read("penalty_service", s.reward.penalty_service);
  rw.read("ground_coeff", s.reward.ground_coeff);
  rw.read("charge_coeff", s.reward.charge_coeff);
  rw.reject_unknown();

  const YAML::Node demand = top.child("demand");
  if (demand) {
    if (!demand.IsSequence()) throw InputError("demand: expected a list of hourly entries" + where(demand));
    for (std::size_t t = 0; t < demand.size(); ++t) {
      s.demand.push_back(read_demand(demand[t], "demand[" + std::to_string(t) + "]"));
    }
  } else if (s.horizon >= 1) {
    s.demand = default_demand_profile(s.horizon, s.area);
  }
  top.reject_unknown();

  s.validate();
  return s;
}

}  // namespace

double Scenario::hour_of_day(int t) const {
  const double h = std::fmod(start_hour + t * slot_seconds / 3600.0, 24.0);
  return h < 0.0 ? h + 24.0 : h;
}

void HourlyDemand::validate() const {
  if (n_users < 0) throw InputError("n_users must be >= 0");
  if (!(hotspot_fraction >= 0.0 && hotspot_fraction <= 1.0)) throw InputError("hotspot_fraction out of [0,1]");
  if (!(rate_bps >= 0.0)) throw InputError("rate must be >= 0");
  for (const auto& h : hotspots) {
    if (!(h.sigma > 0.0)) throw InputError("hotspot sigma must be > 0");
  }
}

void RewardParams::validate() const {
  if (!(penalty_sustainability < penalty_service && penalty_service < 0.0)) {
    throw InputError("reward penalties must satisfy penalty_sustainability < penalty_service < 0");
  }
  if (!(ground_coeff >= 0.0 && charge_coeff >= 0.0)) throw InputError("reward coefficients must be >= 0");
}

void Scenario::validate() const {
  if (horizon < 1) throw InputError("horizon must be >= 1");
  if (fleet_size < 1) throw InputError("fleet_size must be >= 1");
  if (!(slot_seconds > 0.0)) throw InputError("slot_hours must be > 0");
  if (start_hour < 0 || start_hour > 23) throw InputError("start_hour out of [0,23]");
  if (!(area.width > 0.0 && area.height > 0.0)) throw InputError("area dimensions must be > 0");
  if (!(altitudes.ground == 0.0)) throw InputError("altitudes.ground must be 0");
  if (!(0.0 <= altitudes.serving && altitudes.serving < altitudes.charging)) {
    throw InputError("altitudes must satisfy 0 <= serving < charging");
  }
  if (demand.size() != static_cast<std::size_t>(horizon)) {
    throw InputError("demand has " + std::to_string(demand.size()) + " entries, expected horizon = " +
                     std::to_string(horizon));
  }
  for (std::size_t t = 0; t < demand.size(); ++t) {
    try {
      demand[t].validate();
    } catch (const InputError& e) {
      throw InputError("demand[" + std::to_string(t) + "]: " + e.what());
    }
  }
  if (!(p_min >= 0.0 && p_min <= 1.0)) throw InputError("p_min out of [0,1]");
  physics.validate();
  solar.validate();
  radio.validate();
  if (radio.serve_altitude_m != altitudes.serving) throw InputError("radio serve altitude differs from altitudes.serving");
  reward.validate();
}

int default_start_hour(int horizon) {
  if (horizon >= 24) return 0;
  return ((12 - horizon / 2) % 24 + 24) % 24;
}

std::vector<HourlyDemand> default_demand_profile(int horizon, const Area& area) {
  if (horizon < 1) throw InputError("horizon must be >= 1");
  std::vector<HourlyDemand> out;
  out.reserve(static_cast<std::size_t>(horizon));
  const int start = default_start_hour(horizon);
  for (int t = 0; t < horizon; ++t) {
    HourlyDemand d;
    d.n_users = kDemandTable[static_cast<std::size_t>((start + t) % 24)];
    d.hotspot_fraction = kDefaultHotspotFraction;
    d.hotspots = default_hotspots(area);
    out.push_back(std::move(d));
  }
  return out;
}

Scenario default_scenario(int fleet_size, int horizon) {
  Scenario s;
  s.fleet_size = fleet_size;
  s.horizon = horizon;
  s.start_hour = default_start_hour(horizon);
  s.demand = default_demand_profile(horizon, s.area);
  s.radio.serve_altitude_m = s.altitudes.serving;
  s.validate();
  return s;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw InputError(origin + ": parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  try {
    return scenario_from_yaml(root);
  } catch (const InputError& e) {
    throw InputError(origin + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.string());
}

std::string format_scenario(const Scenario& s) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "version" << YAML::Value << kScenarioFormatVersion;
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  out << YAML::Key << "horizon" << YAML::Value << s.horizon;
  out << YAML::Key << "slot_hours" << YAML::Value << s.slot_seconds / 3600.0;
  out << YAML::Key << "start_hour" << YAML::Value << s.start_hour;
  out << YAML::Key << "fleet_size" << YAML::Value << s.fleet_size;
  out << YAML::Key << "p_min" << YAML::Value << s.p_min;

  out << YAML::Key << "area" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "width" << YAML::Value << s.area.width;
  out << YAML::Key << "height" << YAML::Value << s.area.height;
  out << YAML::EndMap;

  out << YAML::Key << "altitudes" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ground" << YAML::Value << s.altitudes.ground;
  out << YAML::Key << "serving" << YAML::Value << s.altitudes.serving;
  out << YAML::Key << "charging" << YAML::Value << s.altitudes.charging;
  out << YAML::EndMap;

  const auto& p = s.physics;
  out << YAML::Key << "physics" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "weight" << YAML::Value << p.weight_n;
  out << YAML::Key << "air_density" << YAML::Value << p.air_density;
  out << YAML::Key << "rotor_count" << YAML::Value << p.rotor_count;
  out << YAML::Key << "rotor_radius" << YAML::Value << p.rotor_radius_m;
  out << YAML::Key << "profile_drag" << YAML::Value << p.profile_drag_coeff;
  out << YAML::Key << "solidity" << YAML::Value << p.solidity;
  out << YAML::Key << "tip_speed" << YAML::Value << p.tip_speed;
  out << YAML::Key << "max_level_speed" << YAML::Value << p.max_level_speed;
  out << YAML::Key << "climb_speed" << YAML::Value << p.climb_speed;
  out << YAML::Key << "descent_speed" << YAML::Value << p.descent_speed;
  out << YAML::Key << "tx_power" << YAML::Value << p.tx_power_w;
  out << YAML::Key << "static_power" << YAML::Value << p.static_power_w;
  out << YAML::Key << "battery_capacity" << YAML::Value << p.battery_capacity_wh;
  out << YAML::EndMap;

  out << YAML::Key << "solar" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "max_intensity" << YAML::Value << s.solar.max_intensity;
  out << YAML::Key << "intensity_threshold" << YAML::Value << s.solar.intensity_threshold;
  out << YAML::Key << "panel_area" << YAML::Value << s.solar.panel_area_m2;
  out << YAML::Key << "efficiency" << YAML::Value << s.solar.efficiency;
  out << YAML::EndMap;

  const auto& r = s.radio;
  out << YAML::Key << "radio" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "carrier_frequency" << YAML::Value << r.carrier_hz;
  out << YAML::Key << "tx_psd" << YAML::Value << r.tx_psd_w_per_hz;
  out << YAML::Key << "noise_psd" << YAML::Value << r.noise_psd_w_per_hz;
  out << YAML::Key << "rb_bandwidth" << YAML::Value << r.rb_bandwidth_hz;
  out << YAML::Key << "rbs_per_uav" << YAML::Value << r.rbs_per_uav;
  out << YAML::Key << "los_excess_db" << YAML::Value << r.los_excess_db;
  out << YAML::Key << "coverage_radius" << YAML::Value << r.coverage_radius_m;
  out << YAML::Key << "max_step" << YAML::Value << r.max_step_m;
  out << YAML::EndMap;

  out << YAML::Key << "reward" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "penalty_sustainability" << YAML::Value << s.reward.penalty_sustainability;
  out << YAML::Key << "penalty_service" << YAML::Value << s.reward.penalty_service;
  out << YAML::Key << "ground_coeff" << YAML::Value << s.reward.ground_coeff;
  out << YAML::Key << "charge_coeff" << YAML::Value << s.reward.charge_coeff;
  out << YAML::EndMap;

  out << YAML::Key << "demand" << YAML::Value << YAML::BeginSeq;
  for (const auto& d : s.demand) {
    out << YAML::BeginMap;
    out << YAML::Key << "users" << YAML::Value << d.n_users;
    out << YAML::Key << "hotspot_fraction" << YAML::Value << d.hotspot_fraction;
    out << YAML::Key << "rate" << YAML::Value << d.rate_bps;
    out << YAML::Key << "hotspots" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& h : d.hotspots) {
      out << YAML::BeginMap << YAML::Key << "x" << YAML::Value << h.x << YAML::Key << "y" << YAML::Value << h.y
          << YAML::Key << "sigma" << YAML::Value << h.sigma << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write scenario file " + path.string());
  out << format_scenario(s);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finaliser over a combined word
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

UserField generate_users(const HourlyDemand& demand, const Area& area, std::uint64_t seed) {
  demand.validate();
  UserField field;
  field.rate_bps = demand.rate_bps;
  if (demand.n_users == 0) return field;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, area.width);
  std::uniform_real_distribution<double> uy(0.0, area.height);
  std::bernoulli_distribution pick_hotspot(demand.hotspot_fraction);
  std::normal_distribution<double> gauss(0.0, 1.0);

  field.positions.reserve(static_cast<std::size_t>(demand.n_users));
  for (int i = 0; i < demand.n_users; ++i) {
    const bool clustered = !demand.hotspots.empty() && pick_hotspot(rng);
    if (!clustered) {
      const double x = ux(rng);
      field.positions.push_back({x, uy(rng)});
      continue;
    }
    std::uniform_int_distribution<std::size_t> which(0, demand.hotspots.size() - 1);
    const Hotspot& h = demand.hotspots[which(rng)];
    Point p;
    int attempts = 0;
    do {
      p.x = h.x + h.sigma * gauss(rng);
      p.y = h.y + h.sigma * gauss(rng);
    } while (!area.contains(p) && ++attempts < kMaxResamples);
    field.positions.push_back(area.clamp(p));
    ++field.hotspot_count;
  }
  return field;
}

}  // namespace sunfleet
