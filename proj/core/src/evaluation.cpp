#include "sunfleet/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "sunfleet/error.hpp"

namespace sunfleet {

double EvaluationMetrics::mean_serving_uavs() const {
  if (mean_n_srv.empty()) return 0.0;
  return std::accumulate(mean_n_srv.begin(), mean_n_srv.end(), 0.0) / static_cast<double>(mean_n_srv.size());
}

EpisodeMetrics summarize(const EpisodeTrace& trace) {
  EpisodeMetrics m;
  m.episode_return = trace.total_return;
  for (const auto& s : trace.steps) {
    const auto& o = s.outcome;
    m.served_users += o.served_users;
    m.sustainability_violations += o.sustainability_violations();
    m.service_violations += o.service_violation;
    m.energy.harvested_wh += o.harvested_wh;
    m.energy.consumed_wh += o.consumed_wh;
    m.energy.discarded_harvest_wh += o.discarded_harvest_wh;
    m.energy.unmet_consumption_wh += o.unmet_consumption_wh;
  }
  return m;
}

EvaluationMetrics evaluate(const Policy& policy, const Environment& env, int episodes) {
  if (episodes < 1) throw InputError("evaluation needs at least one episode");
  EvaluationMetrics m;
  const auto horizon = static_cast<std::size_t>(env.horizon());
  m.n_srv_histogram.assign(horizon, std::vector<int>(static_cast<std::size_t>(env.fleet_size() + 1), 0));
  m.mean_n_srv.assign(horizon, 0.0);
  m.mean_served.assign(horizon, 0.0);

  for (int e = 0; e < episodes; ++e) {
    EpisodeTrace trace = rollout(policy, env);
    const EpisodeMetrics em = summarize(trace);
    m.episodes.push_back(em);
    m.sustainability_violations += em.sustainability_violations;
    m.service_violations += em.service_violations;
    m.energy.harvested_wh += em.energy.harvested_wh;
    m.energy.consumed_wh += em.energy.consumed_wh;
    m.energy.discarded_harvest_wh += em.energy.discarded_harvest_wh;
    m.energy.unmet_consumption_wh += em.energy.unmet_consumption_wh;
    for (const auto& s : trace.steps) {
      const auto t = static_cast<std::size_t>(s.t);
      ++m.n_srv_histogram[t][static_cast<std::size_t>(s.outcome.n_srv)];
      m.mean_n_srv[t] += s.outcome.n_srv;
      m.mean_served[t] += s.outcome.served_users;
    }
    if (e == 0) m.first_trace = std::move(trace);
  }

  const double n = episodes;
  double sum = 0.0;
  m.min_return = m.episodes.front().episode_return;
  for (const auto& e : m.episodes) {
    sum += e.episode_return;
    m.min_return = std::min(m.min_return, e.episode_return);
  }
  m.mean_return = sum / n;
  for (const auto& e : m.episodes) m.return_variance += (e.episode_return - m.mean_return) * (e.episode_return - m.mean_return) / n;
  double running = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    m.mean_n_srv[t] /= n;
    m.mean_served[t] /= n;
    running += m.mean_served[t];
    m.cumulative_served.push_back(running);
  }
  return m;
}

void write_episode_metrics_csv(const EvaluationMetrics& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "episode,return,served_users,sustainability_violations,service_violations,harvested_wh,consumed_wh,"
         "discarded_harvest_wh,unmet_consumption_wh,net_energy_loss_wh\n"
      << std::setprecision(10);
  for (std::size_t e = 0; e < m.episodes.size(); ++e) {
    const auto& x = m.episodes[e];
    out << e << ',' << x.episode_return << ',' << x.served_users << ',' << x.sustainability_violations << ','
        << x.service_violations << ',' << x.energy.harvested_wh << ',' << x.energy.consumed_wh << ','
        << x.energy.discarded_harvest_wh << ',' << x.energy.unmet_consumption_wh << ',' << x.energy.net_loss_wh()
        << '\n';
  }
}

void write_hourly_metrics_csv(const EvaluationMetrics& m, const Environment& env, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "hour,users,n_srv,served_users,cumulative_served_users,harvested_wh,consumed_wh,r1,r2,r3\n"
      << std::setprecision(10);
  for (const auto& s : m.first_trace.steps) {
    const auto t = static_cast<std::size_t>(s.t);
    const auto& o = s.outcome;
    out << s.t << ',' << env.scenario().users_at(s.t) << ',' << m.mean_n_srv[t] << ',' << m.mean_served[t] << ','
        << m.cumulative_served[t] << ',' << o.harvested_wh << ',' << o.consumed_wh << ',' << o.parts.r1 << ','
        << o.parts.r2 << ',' << o.parts.r3 << '\n';
  }
}

}  // namespace sunfleet
