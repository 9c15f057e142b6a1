#include "sunfleet/coverage_map.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sunfleet/error.hpp"

namespace sunfleet {

CoverageMap::CoverageMap(int horizon, int fleet_size) : fleet_size_(fleet_size) {
  if (horizon < 1 || fleet_size < 1) throw InputError("coverage map needs horizon >= 1 and fleet_size >= 1");
  served_.assign(static_cast<std::size_t>(horizon), std::vector<int>(static_cast<std::size_t>(fleet_size + 1), 0));
}

int CoverageMap::served(int t, int n_srv) const {
  return served_.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(n_srv));
}

void CoverageMap::set_served(int t, int n_srv, int value) {
  served_.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(n_srv)) = value;
}

const Placement& CoverageMap::placement(int t, int n_srv) const {
  static const Placement kEmpty;
  if (placements_.empty()) return kEmpty;
  return placements_.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(n_srv));
}

void CoverageMap::set_placement(int t, int n_srv, Placement p) {
  if (placements_.empty()) {
    placements_.assign(served_.size(), std::vector<Placement>(static_cast<std::size_t>(fleet_size_ + 1)));
  }
  placements_.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(n_srv)) = std::move(p);
}

void CoverageMap::make_monotone() {
  for (std::size_t t = 0; t < served_.size(); ++t) {
    auto& row = served_[t];
    for (std::size_t n = 1; n < row.size(); ++n) {
      if (row[n] >= row[n - 1]) continue;
      row[n] = row[n - 1];
      if (!placements_.empty()) placements_[t][n] = placements_[t][n - 1];
    }
  }
}

void CoverageMap::validate_against(const Scenario& s) const {
  if (horizon() != s.horizon) {
    throw InputError("coverage map has " + std::to_string(horizon()) + " hours, scenario horizon is " +
                     std::to_string(s.horizon));
  }
  if (fleet_size_ != s.fleet_size) {
    throw InputError("coverage map fleet size " + std::to_string(fleet_size_) + " differs from scenario fleet size " +
                     std::to_string(s.fleet_size));
  }
  for (int t = 0; t < horizon(); ++t) {
    const auto& r = row(t);
    if (r[0] != 0) throw InputError("coverage map hour " + std::to_string(t) + ": n_srv=0 must serve 0 users");
    for (std::size_t n = 1; n < r.size(); ++n) {
      if (r[n] < r[n - 1]) throw InputError("coverage map hour " + std::to_string(t) + " is not nondecreasing");
    }
    if (r.back() > s.users_at(t)) {
      throw InputError("coverage map hour " + std::to_string(t) + " serves more users than present");
    }
  }
}

UserField slot_users(const Scenario& scenario, int t, std::uint64_t seed) {
  return generate_users(scenario.demand.at(static_cast<std::size_t>(t)), scenario.area,
                        mix_seed(mix_seed(scenario.seed, seed), static_cast<std::uint64_t>(t)));
}

CoverageMap build_coverage_map(const Scenario& scenario, std::uint64_t seed) {
  scenario.validate();
  CoverageMap map(scenario.horizon, scenario.fleet_size);
  for (int t = 0; t < scenario.horizon; ++t) {
    const UserField users = slot_users(scenario, t, seed);
    map.set_placement(t, 0, {});
    Placement previous;
    for (int n = 1; n <= scenario.fleet_size; ++n) {
      const std::uint64_t local = mix_seed(seed, static_cast<std::uint64_t>(t * 1009 + n));
      PlacementResult warm = optimize_placement(users, n, scenario.radio, scenario.area, local, &previous);
      PlacementResult cold = optimize_placement(users, n, scenario.radio, scenario.area, local + 1);
      PlacementResult& best = cold.served > warm.served ? cold : warm;
      map.set_served(t, n, best.served);
      previous = best.placement;
      map.set_placement(t, n, std::move(best.placement));
    }
  }
  map.make_monotone();
  return map;
}

void write_coverage_csv(const CoverageMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "hour,n_srv,served_users\n";
  for (int t = 0; t < map.horizon(); ++t) {
    for (int n = 0; n <= map.fleet_size(); ++n) out << t << ',' << n << ',' << map.served(t, n) << '\n';
  }
}

CoverageMap read_coverage_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open coverage map " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("hour,n_srv,served_users", 0) != 0) {
    throw InputError(path.string() + ": expected header 'hour,n_srv,served_users'");
  }
  struct Row {
    int hour, n, served;
  };
  std::vector<Row> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Row r{};
    char c1 = 0, c2 = 0;
    if (!(ls >> r.hour >> c1 >> r.n >> c2 >> r.served) || c1 != ',' || c2 != ',' || r.hour < 0 || r.n < 0 ||
        r.served < 0) {
      throw InputError(path.string() + ": malformed row at line " + std::to_string(line_no));
    }
    rows.push_back(r);
  }
  int hours = 0, fleet = 0;
  for (const auto& r : rows) {
    hours = std::max(hours, r.hour + 1);
    fleet = std::max(fleet, r.n);
  }
  if (rows.size() != static_cast<std::size_t>(hours) * static_cast<std::size_t>(fleet + 1) || fleet < 1) {
    throw InputError(path.string() + ": expected hours*(fleet+1) rows, got " + std::to_string(rows.size()));
  }
  CoverageMap map(hours, fleet);
  std::vector<bool> seen(rows.size(), false);
  for (const auto& r : rows) {
    const auto idx = static_cast<std::size_t>(r.hour * (fleet + 1) + r.n);
    if (seen[idx]) throw InputError(path.string() + ": duplicate row for hour " + std::to_string(r.hour));
    seen[idx] = true;
    map.set_served(r.hour, r.n, r.served);
  }
  return map;
}

void write_placements_json(const CoverageMap& map, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["fleet_size"] = map.fleet_size();
  doc["placements"] = nlohmann::json::array();
  for (int t = 0; t < map.horizon(); ++t) {
    for (int n = 0; n <= map.fleet_size(); ++n) {
      nlohmann::json entry;
      entry["hour"] = t;
      entry["n_srv"] = n;
      entry["served_users"] = map.served(t, n);
      entry["positions"] = nlohmann::json::array();
      for (const auto& p : map.placement(t, n).positions) entry["positions"].push_back({p.x, p.y});
      doc["placements"].push_back(std::move(entry));
    }
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

}  // namespace sunfleet
