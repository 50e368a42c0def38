#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "ppc/perturb.hpp"
#include "ppc/prompts.hpp"
#include "support/fixtures.hpp"

using namespace ppc;

namespace {

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("sentence splitting") {
  CHECK(split_sentences("A b. C d! E? F") == std::vector<std::string>{"A b.", "C d!", "E?", "F"});
  CHECK(split_sentences("Value 3.14 is pi. Next") == std::vector<std::string>{"Value 3.14 is pi.", "Next"});
  CHECK(split_sentences("e.g. this") == std::vector<std::string>{"e.g.", "this"});
  CHECK(split_sentences("  ").empty());
  CHECK(split_sentences("Wait...  Then.\n\nDone.") == std::vector<std::string>{"Wait...", "Then.", "Done."});
}

TEST_CASE("modes parse") {
  for (auto m : {PerturbMode::Shuffled, PerturbMode::Mismatched, PerturbMode::Generic}) {
    CHECK(perturb_mode_from_string(to_string(m)) == m);
  }
  CHECK_FALSE(perturb_mode_from_string("random"));
}

TEST_CASE("property: shuffled preserves the sentence multiset") {
  std::mt19937_64 rng(4);
  const std::vector<std::string> words = {"alpha", "beta", "x=1", "3.5", "$y$", "naïve", "(a)"};
  const std::vector<char> ends = {'.', '!', '?'};
  int changed = 0;
  for (int i = 0; i < 500; ++i) {
    std::string text;
    const int n = 1 + static_cast<int>(rng() % 8);
    for (int s = 0; s < n; ++s) {
      if (s) text += rng() % 2 ? " " : "\n";
      const int w = 1 + static_cast<int>(rng() % 5);
      for (int k = 0; k < w; ++k) text += (k ? " " : "") + words[rng() % words.size()] + std::to_string(s);
      text += ends[rng() % ends.size()];
    }
    PerturbationSpec spec;
    spec.seed = rng();
    const auto out = perturbed_preplan_text(text, spec, static_cast<std::size_t>(i));
    CHECK(sorted(split_sentences(out)) == sorted(split_sentences(text)));
    CHECK(perturbed_preplan_text(text, spec, static_cast<std::size_t>(i)) == out);
    changed += split_sentences(out) != split_sentences(text);
  }
  CHECK(changed > 250);
}

TEST_CASE("property: derangements over pool sizes 2..50") {
  for (std::size_t n = 2; n <= 50; ++n) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto p = seeded_derangement(n, seed * 7919 + n);
      std::vector<bool> hit(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(p[i] != i);
        REQUIRE(p[i] < n);
        hit[p[i]] = true;
      }
      CHECK(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }));
    }
  }
  CHECK_THROWS_AS(seeded_derangement(1, 0), PoolTooSmall);
  CHECK(seeded_derangement(9, 3) == seeded_derangement(9, 3));
}

TEST_CASE("mismatched assigns another problem's preplan") {
  PerturbationSpec spec;
  spec.mode = PerturbMode::Mismatched;
  spec.seed = 12;
  for (int i = 0; i < 6; ++i) spec.pool.push_back("preplan " + std::to_string(i));
  std::set<std::string> used;
  for (std::size_t i = 0; i < spec.pool.size(); ++i) {
    const auto t = perturbed_preplan_text(spec.pool[i], spec, i);
    CHECK(t != spec.pool[i]);
    used.insert(t);
  }
  CHECK(used.size() == spec.pool.size());
  spec.pool.resize(1);
  CHECK_THROWS_AS(perturbed_preplan_text("x", spec, 0), PoolTooSmall);
  spec.pool.clear();
  CHECK_THROWS_AS(spec.validate(), PoolTooSmall);
}

TEST_CASE("generic is one constant text") {
  PerturbationSpec spec;
  spec.mode = PerturbMode::Generic;
  const auto a = perturbed_preplan_text("first", spec, 0);
  const auto b = perturbed_preplan_text("second", spec, 5);
  CHECK(a == b);
  CHECK(a == std::string(prompts::kGenericPreplan));
  spec.generic_text = "Think carefully.";
  CHECK(perturbed_preplan_text("x", spec, 1) == "Think carefully.");
}

TEST_CASE("prefix and extraction") {
  const auto t = fixtures::traj("One. Two.", "p", "\\boxed{1}");
  PerturbationSpec spec;
  spec.mode = PerturbMode::Generic;
  spec.generic_text = "G.";
  CHECK(perturb_preplan(t, spec, 0) == "<preplan>G.</preplan>\n<plan>");
  CHECK(extract_preplan("<preplan> A </preplan><plan>B</plan><execute>\\boxed{1}</execute>") == "A");
  CHECK(extract_preplan("junk <preplan>A</preplan> no plan") == "A");
  CHECK_FALSE(extract_preplan("<preplan>A"));
  CHECK_FALSE(extract_preplan("nothing"));
}
