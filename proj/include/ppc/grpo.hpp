#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace ppc::grpo {

class GroupTooSmall : public std::invalid_argument {
 public:
  explicit GroupTooSmall(std::size_t g)
      : std::invalid_argument("GRPO group needs at least 2 rollouts, got " + std::to_string(g)) {}
};

class NonFiniteInput : public std::invalid_argument {
 public:
  NonFiniteInput() : std::invalid_argument("non-finite log-probability") {}
};

enum class StdKind { Population, Sample };
enum class KlEstimator { NonNegative, LogRatio };  // r - log r - 1  |  logp_new - logp_ref

struct GrpoConfig {
  double epsilon_clip = 0.2;
  double beta_kl = 0.04;
  double std_floor = 1e-6;
  StdKind std_kind = StdKind::Population;
  KlEstimator kl = KlEstimator::NonNegative;
  bool token_level = false;

  void validate() const;
};

// Sequence log-probabilities per rollout; token lists are optional and, when
// present, must be supplied for all three policies with matching lengths.
struct RolloutGroup {
  std::vector<double> rewards;
  std::vector<double> logp_new;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
  std::optional<std::vector<std::vector<double>>> token_logp_new;
  std::optional<std::vector<std::vector<double>>> token_logp_old;
  std::optional<std::vector<std::vector<double>>> token_logp_ref;

  std::size_t size() const { return rewards.size(); }
  void validate() const;
};

std::vector<double> group_advantages(std::span<const double> rewards, double std_floor = 1e-6,
                                     StdKind kind = StdKind::Population);

double importance_ratio(double logp_new, double logp_old);
std::vector<double> importance_ratio(std::span<const double> logp_new,
                                     std::span<const double> logp_old);

double clipped_surrogate(double rho, double advantage, double epsilon);

double kl_term(double logp_new, double logp_ref, KlEstimator kind = KlEstimator::NonNegative);
// Token-level: summed over tokens.
double kl_term(std::span<const double> logp_new, std::span<const double> logp_ref,
               KlEstimator kind = KlEstimator::NonNegative);

struct RolloutDiagnostics {
  double advantage = 0.0;
  double ratio = 1.0;  // sequence ratio, or mean token ratio at token level
  double surrogate = 0.0;
  double kl = 0.0;
  bool clipped = false;
};

struct ObjectiveResult {
  double objective = 0.0;
  double mean_surrogate = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;  // fraction of ratios outside [1-eps, 1+eps]
  std::vector<RolloutDiagnostics> rollouts;
};

ObjectiveResult grpo_objective(const RolloutGroup& group, const GrpoConfig& cfg);

nlohmann::json to_json(const ObjectiveResult& r);
nlohmann::json to_json(const GrpoConfig& c);
// epsilon_clip and beta_kl are mandatory keys.
GrpoConfig grpo_config_from_json(const nlohmann::json& j);
RolloutGroup rollout_group_from_json(const nlohmann::json& j);

}  // namespace ppc::grpo
