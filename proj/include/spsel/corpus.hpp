#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "spsel/types.hpp"

namespace spsel {

// One BIO-tagged sentence. |tokens| == |labels|, labels form a valid BIO
// sequence ("O", "B-<slot>", "I-<slot>" with I continuing a same-slot span).
struct LabeledSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;

  bool operator==(const LabeledSentence&) const = default;
};

// A named set of labeled sentences with derived lexical statistics.
// vocabulary holds lowercased unique tokens; label_set holds slot names with
// BIO prefixes stripped and "O" excluded.
struct Domain {
  std::string name;
  std::vector<LabeledSentence> sentences;
  std::set<std::string> vocabulary;
  std::set<std::string> label_set;

  std::size_t size() const { return sentences.size(); }
};

// One few-shot task: a K-shot support set plus a query set drawn from the
// same domain, disjoint at the sentence level.
struct Episode {
  std::vector<LabeledSentence> support;
  std::vector<LabeledSentence> query;
  int k = 1;
  // Slot names present in support, in first-appearance order.
  std::vector<std::string> label_inventory;
};

// "B-city" -> "city", "I-city" -> "city", "O" -> "".
std::string slot_of(const std::string& label);

std::string lowercase(const std::string& s);

// Throws ValidationError on length mismatch or BIO violations.
void validate_sentence(const LabeledSentence& sentence);

// Derives vocabulary/label_set; validates every sentence.
Domain make_domain(std::string name, std::vector<LabeledSentence> sentences);

// Reads a JSON Lines file, one {"tokens":[...],"labels":[...]} object per
// line. Errors report the offending line or sentence index.
Domain load_domain(const std::string& path, const std::string& name);

// Inverse of load_domain (token/label content round-trips exactly).
void save_domain(const Domain& domain, const std::string& path);

// Sentences concatenated in input order; vocabulary/label_set are unions.
Domain merge_domains(const std::vector<Domain>& domains, const std::string& name);

// Greedy minimum-inclusion episode sampler: repeatedly add the sentence
// covering the most still-under-quota slots until every slot in the domain
// occurs in at least k support sentences, then draw the query uniformly from
// the remainder. Deterministic given seed.
std::vector<Episode> build_episodes(const Domain& domain, int k, int n_episodes,
                                    std::uint64_t seed, int query_size = 16);

// Episode dumps: one {"support":[...],"query":[...],"k":K} object per line,
// sentences in the domain-file schema.
void save_episodes(const std::vector<Episode>& episodes, const std::string& path);

}  // namespace spsel
