#pragma once

namespace sunfleet {

// Reward shaping for the charging-profile decision process.
struct RewardParams {
  double penalty_sustainability = -200.0;  // per UAV below its climb reserve
  double penalty_service = -100.0;         // slot below the minimum service rate
  double ground_coeff = 1.0;               // per grounded UAV when landing pays off
  double charge_coeff = 2.0;               // per charging UAV when charging pays off

  void validate() const;
  friend bool operator==(const RewardParams&, const RewardParams&) = default;
};

}  // namespace sunfleet
