#pragma once

#include <cstdint>
#include <vector>

#include "spsel/corpus.hpp"

namespace spsel {

// Synthetic multi-domain testbed. Two two-domain families with graded
// vocabulary/slot overlap (travel: tra/trb, media: mea/meb), one cross
// domain (crx) that reuses family slot values under its own conflicting
// label scheme, and one adversarial domain (adv) with fully disjoint
// vocabulary and slots.
struct BenchConfig {
  int family_sentences = 56;
  int cross_sentences = 64;
  int adversarial_sentences = 64;
  std::uint64_t seed = 7;
};

std::vector<Domain> generate_benchmark(const BenchConfig& config = {});

}  // namespace spsel
