#pragma once

#include <filesystem>
#include <vector>

#include "sunfleet/environment.hpp"

namespace sunfleet {

struct EnergyLedger {
  double harvested_wh = 0.0;
  double consumed_wh = 0.0;
  double discarded_harvest_wh = 0.0;
  double unmet_consumption_wh = 0.0;

  double net_loss_wh() const { return consumed_wh - harvested_wh; }
};

struct EpisodeMetrics {
  double episode_return = 0.0;
  int served_users = 0;
  int sustainability_violations = 0;
  int service_violations = 0;
  EnergyLedger energy;
};

struct EvaluationMetrics {
  std::vector<EpisodeMetrics> episodes;
  double mean_return = 0.0;
  double min_return = 0.0;
  double return_variance = 0.0;
  std::vector<std::vector<int>> n_srv_histogram;  // [t][n]: episodes with n serving UAVs at t
  std::vector<double> mean_n_srv;                 // per slot
  std::vector<double> mean_served;                // per slot
  std::vector<double> cumulative_served;          // running sum of mean_served
  int sustainability_violations = 0;              // summed over episodes
  int service_violations = 0;
  EnergyLedger energy;  // summed over episodes
  EpisodeTrace first_trace;

  double mean_serving_uavs() const;  // average of mean_n_srv over slots
};

EpisodeMetrics summarize(const EpisodeTrace& trace);

EvaluationMetrics evaluate(const Policy& policy, const Environment& env, int episodes);

// One row per episode.
void write_episode_metrics_csv(const EvaluationMetrics& m, const std::filesystem::path& path);
// One row per slot: hour, users, n_srv, served users, cumulative served, energy.
void write_hourly_metrics_csv(const EvaluationMetrics& m, const Environment& env, const std::filesystem::path& path);

}  // namespace sunfleet
