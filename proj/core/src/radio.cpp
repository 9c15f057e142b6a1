#include "sunfleet/radio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "sunfleet/error.hpp"

namespace sunfleet {

void RadioParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string("radio.") + name + " must be > 0");
  };
  positive(carrier_hz, "carrier_frequency");
  positive(tx_psd_w_per_hz, "tx_psd");
  positive(noise_psd_w_per_hz, "noise_psd");
  positive(rb_bandwidth_hz, "rb_bandwidth");
  if (rbs_per_uav < 1) throw InputError("radio.rbs_per_uav must be >= 1");
  if (!(los_excess_db >= 0.0)) throw InputError("radio.los_excess_db must be >= 0");
  positive(coverage_radius_m, "coverage_radius");
  positive(serve_altitude_m, "serve_altitude");
  positive(max_step_m, "max_step");
}

int Association::served() const {
  return static_cast<int>(std::count_if(server.begin(), server.end(), [](int s) { return s != kUnassigned; }));
}

double path_loss_db(double d, const RadioParams& r) {
  if (!(d > 0.0)) throw DomainError("path loss needs a positive distance");
  return 20.0 * std::log10(4.0 * std::numbers::pi * r.carrier_hz * d / kSpeedOfLight) + r.los_excess_db;
}

double channel_gain(double d, const RadioParams& r) { return std::pow(10.0, -path_loss_db(d, r) / 20.0); }

double link_distance(const Point& uav, const Point& user, const RadioParams& r) {
  const double ground = distance(uav, user);
  return std::sqrt(ground * ground + r.serve_altitude_m * r.serve_altitude_m);
}

bool covers(const Point& uav, const Point& user, const RadioParams& r) {
  return distance(uav, user) <= r.coverage_radius_m;
}

double sinr(const Point& user, std::size_t uav, const Placement& placement, const RadioParams& r) {
  double interference = 0.0;
  for (std::size_t j = 0; j < placement.size(); ++j) {
    if (j == uav || !covers(placement.positions[j], user, r)) continue;
    interference += r.tx_psd_w_per_hz * channel_gain(link_distance(placement.positions[j], user, r), r);
  }
  const double signal = r.tx_psd_w_per_hz * channel_gain(link_distance(placement.positions[uav], user, r), r);
  return signal / (r.noise_psd_w_per_hz + interference);
}

namespace {

std::optional<int> rbs_for_sinr(double sinr_value, double rate_bps, const RadioParams& r) {
  if (rate_bps <= 0.0) return 0;
  const double per_rb = r.rb_bandwidth_hz * std::log2(1.0 + sinr_value);
  if (!(per_rb > 0.0)) return std::nullopt;
  const double need = std::ceil(rate_bps / per_rb);
  if (need > r.rbs_per_uav) return std::nullopt;
  int n = static_cast<int>(need);
  // guard the ceil against rounding in either direction
  while (n > 0 && (n - 1) * per_rb >= rate_bps) --n;
  while (n * per_rb < rate_bps) ++n;
  if (n > r.rbs_per_uav) return std::nullopt;
  return n;
}

struct Candidate {
  int uav;
  double sinr;
  std::optional<int> rbs;
};

}  // namespace

std::optional<int> required_rbs(const Point& user, std::size_t uav, const Placement& placement,
                                const RadioParams& r, double rate_bps) {
  if (uav >= placement.size()) throw DomainError("UAV index out of range");
  if (!covers(placement.positions[uav], user, r)) throw DomainError("user is not covered by the UAV");
  return rbs_for_sinr(sinr(user, uav, placement, r), rate_bps, r);
}

Association associate_users(const Placement& placement, const UserField& users, const RadioParams& r) {
  const std::size_t n_users = users.size();
  const std::size_t n_uav = placement.size();
  Association a;
  a.server.assign(n_users, Association::kUnassigned);
  a.rbs.assign(n_users, 0);
  a.rb_used.assign(n_uav, 0);
  if (n_uav == 0 || n_users == 0) return a;

  // Preference list per user: covering UAVs by SINR descending, then index.
  std::vector<std::vector<Candidate>> prefs(n_users);
  std::vector<double> gains(n_uav);
  std::vector<bool> covering(n_uav);
  for (std::size_t u = 0; u < n_users; ++u) {
    const Point& pos = users.positions[u];
    for (std::size_t i = 0; i < n_uav; ++i) {
      covering[i] = covers(placement.positions[i], pos, r);
      gains[i] = covering[i] ? r.tx_psd_w_per_hz * channel_gain(link_distance(placement.positions[i], pos, r), r) : 0.0;
    }
    for (std::size_t i = 0; i < n_uav; ++i) {
      if (!covering[i]) continue;
      double interference = 0.0;
      for (std::size_t j = 0; j < n_uav; ++j) {
        if (j != i && covering[j]) interference += gains[j];
      }
      const double s = gains[i] / (r.noise_psd_w_per_hz + interference);
      prefs[u].push_back({static_cast<int>(i), s, rbs_for_sinr(s, users.rate_bps, r)});
    }
    std::stable_sort(prefs[u].begin(), prefs[u].end(),
                     [](const Candidate& x, const Candidate& y) { return x.sinr > y.sinr; });
  }

  std::vector<std::size_t> next(n_users, 0);
  std::vector<std::vector<std::pair<double, std::size_t>>> requests(n_uav);
  for (;;) {
    bool any = false;
    for (auto& q : requests) q.clear();
    for (std::size_t u = 0; u < n_users; ++u) {
      if (a.server[u] != Association::kUnassigned || next[u] >= prefs[u].size()) continue;
      const Candidate& c = prefs[u][next[u]];
      requests[static_cast<std::size_t>(c.uav)].push_back({c.sinr, u});
      any = true;
    }
    if (!any) break;
    for (std::size_t i = 0; i < n_uav; ++i) {
      auto& q = requests[i];
      std::sort(q.begin(), q.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
      });
      for (const auto& [s, u] : q) {
        const Candidate& c = prefs[u][next[u]];
        if (c.rbs && a.rb_used[i] + *c.rbs <= r.rbs_per_uav) {
          a.server[u] = static_cast<int>(i);
          a.rbs[u] = *c.rbs;
          a.rb_used[i] += *c.rbs;
        }
        ++next[u];
      }
    }
  }
  return a;
}

namespace {

// Lexicographic: served users, then covered users, then fewer RBs spent,
// then served-user spectral efficiency. The last two move UAVs toward
// stronger links while the counts sit on a plateau.
struct Score {
  int served = 0;
  int covered = 0;
  int spare_rbs = 0;
  double link_bits = 0.0;

  friend auto operator<=>(const Score&, const Score&) = default;
};

Score evaluate(const Placement& p, const UserField& users, const RadioParams& r) {
  Score s;
  const Association a = associate_users(p, users, r);
  s.served = a.served();
  for (int used : a.rb_used) s.spare_rbs += r.rbs_per_uav - used;
  for (std::size_t u = 0; u < users.size(); ++u) {
    if (a.server[u] == Association::kUnassigned) continue;
    s.link_bits += std::log2(1.0 + sinr(users.positions[u], static_cast<std::size_t>(a.server[u]), p, r));
  }
  for (const auto& u : users.positions) {
    for (const auto& x : p.positions) {
      if (covers(x, u, r)) {
        ++s.covered;
        break;
      }
    }
  }
  return s;
}

// Start positions: a grid at a third of the coverage radius plus every user.
std::vector<Point> candidates(const UserField& users, const RadioParams& r, const Area& area) {
  std::vector<Point> out;
  const double pitch = r.coverage_radius_m / 3.0;
  for (double x = 0.0; x <= area.width; x += pitch) {
    for (double y = 0.0; y <= area.height; y += pitch) out.push_back({x, y});
  }
  for (const auto& u : users.positions) out.push_back(area.clamp(u));
  return out;
}

// Candidates ranked by the score of the placement with UAV i moved there.
std::vector<std::pair<Score, std::size_t>> rank_moves(Placement p, std::size_t i, const std::vector<Point>& cands,
                                                      const UserField& users, const RadioParams& r) {
  std::vector<std::pair<Score, std::size_t>> ranked;
  ranked.reserve(cands.size());
  for (std::size_t c = 0; c < cands.size(); ++c) {
    p.positions[i] = cands[c];
    ranked.emplace_back(evaluate(p, users, r), c);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  return ranked;
}

// Adds UAVs one at a time at the candidate that scores best with the others fixed.
void greedy_seed(Placement& p, std::size_t target, const std::vector<Point>& cands, const UserField& users,
                 const RadioParams& r) {
  while (p.size() < target) {
    p.positions.push_back(cands.front());
    p.positions.back() = cands[rank_moves(p, p.size() - 1, cands, users, r).front().second];
  }
}

constexpr int kMaxSweeps = 300;
constexpr int kRestarts = 8;
constexpr std::size_t kRestartPool = 8;

Score hill_climb(Placement& p, Score current, const UserField& users, const RadioParams& r, const Area& area) {
  static constexpr std::array<std::pair<double, double>, 8> kDirs = {{{1, 0},
                                                                     {-1, 0},
                                                                     {0, 1},
                                                                     {0, -1},
                                                                     {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2},
                                                                     {-std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2},
                                                                     {std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2},
                                                                     {-std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2}}};
  const std::array<double, 3> steps = {r.max_step_m, r.max_step_m / 2.0, r.max_step_m / 4.0};
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool improved = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (double step : steps) {
        for (const auto& [dx, dy] : kDirs) {
          const Point old = p.positions[i];
          const Point moved = area.clamp({old.x + step * dx, old.y + step * dy});
          if (moved == old) continue;
          p.positions[i] = moved;
          const Score s = evaluate(p, users, r);
          if (s > current) {
            current = s;
            improved = true;
          } else {
            p.positions[i] = old;
          }
        }
      }
    }
    if (!improved) break;
  }
  return current;
}

}  // namespace

PlacementResult optimize_placement(const UserField& users, int n_srv, const RadioParams& r, const Area& area,
                                   std::uint64_t seed, const Placement* warm_start) {
  PlacementResult result;
  if (n_srv <= 0) return result;
  const auto target = static_cast<std::size_t>(n_srv);

  Placement start;
  if (warm_start) {
    for (std::size_t i = 0; i < std::min(target, warm_start->size()); ++i) {
      start.positions.push_back(area.clamp(warm_start->positions[i]));
    }
  }
  const std::vector<Point> cands = candidates(users, r, area);
  greedy_seed(start, target, cands, users, r);

  Placement best = start;
  Score best_score = hill_climb(best, evaluate(best, users, r), users, r, area);

  if (!users.empty()) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_uav(0, target - 1);
    std::uniform_int_distribution<std::size_t> pick_rank(0, kRestartPool - 1);
    for (int k = 0; k < kRestarts; ++k) {
      // relocate one UAV to one of the best spots for it and re-climb
      Placement trial = best;
      const std::size_t i = pick_uav(rng);
      const auto ranked = rank_moves(trial, i, cands, users, r);
      trial.positions[i] = cands[ranked[std::min(pick_rank(rng), ranked.size() - 1)].second];
      const Score s = hill_climb(trial, evaluate(trial, users, r), users, r, area);
      if (s > best_score) {
        best_score = s;
        best = std::move(trial);
      }
    }
  }
  result.placement = std::move(best);
  result.served = best_score.served;
  return result;
}

int brute_force_placement(const UserField& users, int n_srv, double grid_step, const RadioParams& r,
                          const Area& area) {
  if (n_srv <= 0) return 0;
  if (n_srv > 2) throw SizeError("brute-force placement supports at most 2 UAVs");
  if (!(grid_step > 0.0)) throw InputError("grid step must be > 0");
  std::vector<Point> grid;
  const auto nx = static_cast<std::size_t>(std::floor(area.width / grid_step)) + 1;
  const auto ny = static_cast<std::size_t>(std::floor(area.height / grid_step)) + 1;
  const double combos = n_srv == 1 ? double(nx * ny) : double(nx * ny) * double(nx * ny + 1) / 2.0;
  if (combos > double(kBruteForceBudget)) {
    throw SizeError("brute-force placement needs " + std::to_string(combos) + " evaluations, budget is " +
                    std::to_string(kBruteForceBudget));
  }
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) grid.push_back({ix * grid_step, iy * grid_step});
  }
  int best = 0;
  Placement p;
  if (n_srv == 1) {
    p.positions.resize(1);
    for (const auto& g : grid) {
      p.positions[0] = g;
      best = std::max(best, associate_users(p, users, r).served());
    }
    return best;
  }
  p.positions.resize(2);
  for (std::size_t a = 0; a < grid.size(); ++a) {
    for (std::size_t b = a; b < grid.size(); ++b) {
      p.positions[0] = grid[a];
      p.positions[1] = grid[b];
      best = std::max(best, associate_users(p, users, r).served());
    }
  }
  return best;
}

}  // namespace sunfleet
