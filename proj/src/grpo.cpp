#include "ppc/grpo.hpp"

#include <algorithm>
#include <cmath>

namespace ppc::grpo {

namespace {

void require_finite(double x) {
  if (!std::isfinite(x)) throw NonFiniteInput();
}

bool outside_clip(double rho, double eps) { return rho < 1.0 - eps || rho > 1.0 + eps; }

}  // namespace

void GrpoConfig::validate() const {
  if (!(epsilon_clip > 0.0)) throw std::invalid_argument("epsilon_clip must be > 0");
  if (!(beta_kl >= 0.0)) throw std::invalid_argument("beta_kl must be >= 0");
  if (!(std_floor >= 0.0)) throw std::invalid_argument("std_floor must be >= 0");
}

void RolloutGroup::validate() const {
  const std::size_t g = rewards.size();
  if (g < 2) throw GroupTooSmall(g);
  if (logp_new.size() != g || logp_old.size() != g || logp_ref.size() != g) {
    throw std::invalid_argument("rollout arrays must all have length G");
  }
  const bool any_tokens = token_logp_new || token_logp_old || token_logp_ref;
  if (!any_tokens) return;
  if (!token_logp_new || !token_logp_old || !token_logp_ref) {
    throw std::invalid_argument("token log-probabilities must be given for all three policies");
  }
  if (token_logp_new->size() != g || token_logp_old->size() != g || token_logp_ref->size() != g) {
    throw std::invalid_argument("token log-probability lists must have length G");
  }
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t n = (*token_logp_new)[i].size();
    if ((*token_logp_old)[i].size() != n || (*token_logp_ref)[i].size() != n) {
      throw std::invalid_argument("token lists differ in length for rollout " +
                                  std::to_string(i));
    }
  }
}

std::vector<double> group_advantages(std::span<const double> rewards, double std_floor,
                                     StdKind kind) {
  const std::size_t g = rewards.size();
  if (g < 2) throw GroupTooSmall(g);
  for (double r : rewards) require_finite(r);
  // Work relative to the first reward so equal rewards cancel exactly and the
  // std floor cannot amplify rounding noise from a large common offset.
  const double pivot = rewards[0];
  double sum = 0.0;
  for (double r : rewards) sum += r - pivot;
  const double mean = sum / static_cast<double>(g);
  double ss = 0.0;
  for (double r : rewards) ss += (r - pivot - mean) * (r - pivot - mean);
  const double denom = kind == StdKind::Population ? static_cast<double>(g)
                                                   : static_cast<double>(g - 1);
  const double sd = std::sqrt(ss / denom);
  const double scale = std::max(sd, std_floor);

  std::vector<double> adv(g, 0.0);
  if (scale == 0.0) return adv;  // identical rewards with no floor
  for (std::size_t i = 0; i < g; ++i) adv[i] = (rewards[i] - pivot - mean) / scale;
  return adv;
}

double importance_ratio(double logp_new, double logp_old) {
  require_finite(logp_new);
  require_finite(logp_old);
  return std::exp(logp_new - logp_old);
}

std::vector<double> importance_ratio(std::span<const double> logp_new,
                                     std::span<const double> logp_old) {
  if (logp_new.size() != logp_old.size()) {
    throw std::invalid_argument("token lists differ in length");
  }
  std::vector<double> out(logp_new.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = importance_ratio(logp_new[i], logp_old[i]);
  return out;
}

double clipped_surrogate(double rho, double advantage, double epsilon) {
  const double clipped = std::clamp(rho, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(rho * advantage, clipped * advantage);
}

double kl_term(double logp_new, double logp_ref, KlEstimator kind) {
  require_finite(logp_new);
  require_finite(logp_ref);
  if (kind == KlEstimator::LogRatio) return logp_new - logp_ref;
  const double log_r = logp_ref - logp_new;
  // r - log r - 1 via expm1; exact zero at r == 1 and never negative.
  return std::max(0.0, std::expm1(log_r) - log_r);
}

double kl_term(std::span<const double> logp_new, std::span<const double> logp_ref,
               KlEstimator kind) {
  if (logp_new.size() != logp_ref.size()) {
    throw std::invalid_argument("token lists differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < logp_new.size(); ++i) total += kl_term(logp_new[i], logp_ref[i], kind);
  return total;
}

ObjectiveResult grpo_objective(const RolloutGroup& group, const GrpoConfig& cfg) {
  cfg.validate();
  group.validate();
  const std::size_t g = group.size();
  const bool token_level = cfg.token_level && group.token_logp_new.has_value();
  const auto adv = group_advantages(group.rewards, cfg.std_floor, cfg.std_kind);

  ObjectiveResult res;
  res.rollouts.resize(g);
  std::size_t clipped = 0;
  std::size_t ratios = 0;
  double surrogate_sum = 0.0;
  double kl_sum = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    auto& d = res.rollouts[i];
    d.advantage = adv[i];
    if (token_level) {
      const auto& tn = (*group.token_logp_new)[i];
      const auto& to = (*group.token_logp_old)[i];
      const auto& tr = (*group.token_logp_ref)[i];
      const auto rho = importance_ratio(tn, to);
      double s = 0.0;
      double rho_sum = 0.0;
      bool any_clipped = false;
      for (double r : rho) {
        s += clipped_surrogate(r, adv[i], cfg.epsilon_clip);
        rho_sum += r;
        if (outside_clip(r, cfg.epsilon_clip)) {
          ++clipped;
          any_clipped = true;
        }
      }
      ratios += rho.size();
      const double n = static_cast<double>(std::max<std::size_t>(rho.size(), 1));
      d.surrogate = rho.empty() ? 0.0 : s / n;
      d.ratio = rho.empty() ? 1.0 : rho_sum / n;
      d.clipped = any_clipped;
      d.kl = kl_term(tn, tr, cfg.kl);
    } else {
      d.ratio = importance_ratio(group.logp_new[i], group.logp_old[i]);
      d.surrogate = clipped_surrogate(d.ratio, adv[i], cfg.epsilon_clip);
      d.clipped = outside_clip(d.ratio, cfg.epsilon_clip);
      if (d.clipped) ++clipped;
      ++ratios;
      d.kl = kl_term(group.logp_new[i], group.logp_ref[i], cfg.kl);
    }
    surrogate_sum += d.surrogate;
    kl_sum += d.kl;
  }
  res.mean_surrogate = surrogate_sum / static_cast<double>(g);
  res.mean_kl = kl_sum / static_cast<double>(g);
  res.objective = res.mean_surrogate - cfg.beta_kl * res.mean_kl;
  res.clip_fraction = ratios == 0 ? 0.0 : static_cast<double>(clipped) / static_cast<double>(ratios);
  return res;
}

nlohmann::json to_json(const ObjectiveResult& r) {
  nlohmann::json adv = nlohmann::json::array();
  nlohmann::json rollouts = nlohmann::json::array();
  for (const auto& d : r.rollouts) {
    adv.push_back(d.advantage);
    rollouts.push_back({{"advantage", d.advantage},
                        {"ratio", d.ratio},
                        {"surrogate", d.surrogate},
                        {"kl", d.kl},
                        {"clipped", d.clipped}});
  }
  return {{"advantages", adv},
          {"objective", r.objective},
          {"mean_surrogate", r.mean_surrogate},
          {"mean_kl", r.mean_kl},
          {"clip_fraction", r.clip_fraction},
          {"rollouts", rollouts}};
}

nlohmann::json to_json(const GrpoConfig& c) {
  return {{"epsilon_clip", c.epsilon_clip},
          {"beta_kl", c.beta_kl},
          {"std_floor", c.std_floor},
          {"std", c.std_kind == StdKind::Population ? "population" : "sample"},
          {"kl_estimator", c.kl == KlEstimator::NonNegative ? "nonnegative" : "log_ratio"},
          {"token_level", c.token_level}};
}

GrpoConfig grpo_config_from_json(const nlohmann::json& j) {
  if (!j.contains("epsilon_clip") || !j.contains("beta_kl")) {
    throw std::invalid_argument("grpo config must set epsilon_clip and beta_kl explicitly");
  }
  GrpoConfig c;
  c.epsilon_clip = j.at("epsilon_clip").get<double>();
  c.beta_kl = j.at("beta_kl").get<double>();
  c.std_floor = j.value("std_floor", c.std_floor);
  const auto std_kind = j.value("std", std::string("population"));
  if (std_kind == "population") {
    c.std_kind = StdKind::Population;
  } else if (std_kind == "sample") {
    c.std_kind = StdKind::Sample;
  } else {
    throw std::invalid_argument("unknown std kind: " + std_kind);
  }
  const auto kl = j.value("kl_estimator", std::string("nonnegative"));
  if (kl == "nonnegative") {
    c.kl = KlEstimator::NonNegative;
  } else if (kl == "log_ratio") {
    c.kl = KlEstimator::LogRatio;
  } else {
    throw std::invalid_argument("unknown kl estimator: " + kl);
  }
  c.token_level = j.value("token_level", false);
  c.validate();
  return c;
}

RolloutGroup rollout_group_from_json(const nlohmann::json& j) {
  RolloutGroup g;
  g.rewards = j.at("rewards").get<std::vector<double>>();
  auto tokens = [&j](const char* key) -> std::optional<std::vector<std::vector<double>>> {
    if (!j.contains(key)) return std::nullopt;
    return j.at(key).get<std::vector<std::vector<double>>>();
  };
  g.token_logp_new = tokens("token_logp_new");
  g.token_logp_old = tokens("token_logp_old");
  g.token_logp_ref = tokens("token_logp_ref");
  // Sequence log-probabilities default to token sums when only tokens are given.
  auto seq = [&j](const char* key, const std::optional<std::vector<std::vector<double>>>& tok) {
    if (j.contains(key)) return j.at(key).get<std::vector<double>>();
    if (!tok) throw std::invalid_argument(std::string("missing ") + key);
    std::vector<double> out;
    for (const auto& t : *tok) {
      double s = 0.0;
      for (double x : t) s += x;
      out.push_back(s);
    }
    return out;
  };
  g.logp_new = seq("logp_new", g.token_logp_new);
  g.logp_old = seq("logp_old", g.token_logp_old);
  g.logp_ref = seq("logp_ref", g.token_logp_ref);
  g.validate();
  return g;
}

}  // namespace ppc::grpo
