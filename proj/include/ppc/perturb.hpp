#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppc/trajectory.hpp"

namespace ppc {

enum class PerturbMode { Shuffled, Mismatched, Generic };

std::string_view to_string(PerturbMode m);
std::optional<PerturbMode> perturb_mode_from_string(std::string_view s);

struct PerturbationSpec {
  PerturbMode mode = PerturbMode::Shuffled;
  std::uint64_t seed = 0;
  std::vector<std::string> pool;  // preplans of the benchmark, for mismatched
  std::string generic_text;       // defaults to the frozen generic preplan

  void validate() const;
};

class PoolTooSmall : public std::invalid_argument {
 public:
  explicit PoolTooSmall(std::size_t n)
      : std::invalid_argument("mismatched perturbation needs a pool of at least 2, got " +
                              std::to_string(n)) {}
};

// Split after '.', '!' or '?' when followed by whitespace or the end of text.
// No abbreviation handling. Sentences are trimmed; empty ones are dropped.
std::vector<std::string> split_sentences(std::string_view text);

// Uniform random cyclic permutation (Sattolo), so perm[i] != i for all i.
std::vector<std::size_t> seeded_derangement(std::size_t n, std::uint64_t seed);

// Seeded Fisher-Yates; stable across standard libraries.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// The replacement preplan text for the problem at `pool_index`.
std::string perturbed_preplan_text(const std::string& original_preplan, const PerturbationSpec& spec,
                                   std::size_t pool_index);

// "<preplan>" + text + "</preplan>\n<plan>", to be used as a forced prefix.
std::string perturb_preplan(const Trajectory& original, const PerturbationSpec& spec,
                            std::size_t pool_index);

std::string preplan_prefix(std::string_view preplan_text);

// Strict parse first, then the content of the first <preplan> block.
std::optional<std::string> extract_preplan(std::string_view completion);

}  // namespace ppc
