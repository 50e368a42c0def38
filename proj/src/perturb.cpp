#include "ppc/perturb.hpp"

#include <cctype>
#include <random>

#include "ppc/prompts.hpp"

namespace ppc {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::size_t draw_below(std::mt19937_64& rng, std::size_t bound) {
  return static_cast<std::size_t>(rng() % bound);
}

}  // namespace

std::string_view to_string(PerturbMode m) {
  switch (m) {
    case PerturbMode::Shuffled: return "shuffled";
    case PerturbMode::Mismatched: return "mismatched";
    case PerturbMode::Generic: return "generic";
  }
  return "?";
}

std::optional<PerturbMode> perturb_mode_from_string(std::string_view s) {
  if (s == "shuffled") return PerturbMode::Shuffled;
  if (s == "mismatched") return PerturbMode::Mismatched;
  if (s == "generic") return PerturbMode::Generic;
  return std::nullopt;
}

void PerturbationSpec::validate() const {
  if (mode == PerturbMode::Mismatched && pool.size() < 2) throw PoolTooSmall(pool.size());
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    auto s = trim(text.substr(start, end - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || is_space(text[i + 1]))) {
      flush(i + 1);
    }
  }
  flush(text.size());
  return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[draw_below(rng, i)]);
  return p;
}

std::vector<std::size_t> seeded_derangement(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw PoolTooSmall(n);
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(p[i], p[draw_below(rng, i)]);
  return p;
}

std::string perturbed_preplan_text(const std::string& original_preplan, const PerturbationSpec& spec,
                                   std::size_t pool_index) {
  spec.validate();
  switch (spec.mode) {
    case PerturbMode::Shuffled: {
      const auto sentences = split_sentences(original_preplan);
      const auto perm = seeded_permutation(sentences.size(), mix_seed(spec.seed, pool_index));
      std::string out;
      for (std::size_t i = 0; i < perm.size(); ++i) {
        if (i) out.push_back(' ');
        out += sentences[perm[i]];
      }
      return out;
    }
    case PerturbMode::Mismatched: {
      if (pool_index >= spec.pool.size()) {
        throw std::out_of_range("pool index " + std::to_string(pool_index) + " outside pool");
      }
      return spec.pool[seeded_derangement(spec.pool.size(), spec.seed)[pool_index]];
    }
    case PerturbMode::Generic:
      return spec.generic_text.empty() ? std::string(prompts::kGenericPreplan) : spec.generic_text;
  }
  return original_preplan;
}

std::string preplan_prefix(std::string_view preplan_text) {
  return "<preplan>" + std::string(preplan_text) + "</preplan>\n<plan>";
}

std::string perturb_preplan(const Trajectory& original, const PerturbationSpec& spec,
                            std::size_t pool_index) {
  return preplan_prefix(perturbed_preplan_text(original.preplan, spec, pool_index));
}

std::optional<std::string> extract_preplan(std::string_view completion) {
  try {
    return parse_trajectory(completion).preplan;
  } catch (const std::exception&) {
  }
  const auto open = completion.find("<preplan>");
  if (open == std::string_view::npos) return std::nullopt;
  const auto body = open + 9;
  const auto close = completion.find("</preplan>", body);
  if (close == std::string_view::npos) return std::nullopt;
  return trim(completion.substr(body, close - body));
}

}  // namespace ppc
