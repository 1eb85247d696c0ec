// Brute-force reference implementations used only by tests. These are kept
// deliberately naive and structurally independent of the library code they
// check.
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "spsel/corpus.hpp"
#include "spsel/rng.hpp"
#include "spsel/spnet.hpp"
#include "spsel/trainer.hpp"

namespace oracle {

using spsel::Domain;
using spsel::LabeledSentence;
using spsel::Matrix;

inline std::vector<std::string> all_lower_tokens(const Domain& d) {
  std::vector<std::string> tokens;
  for (const auto& sentence : d.sentences) {
    for (const auto& token : sentence.tokens) tokens.push_back(spsel::lowercase(token));
  }
  return tokens;
}

inline double tvc(const Domain& source, const Domain& target) {
  std::vector<std::string> covered;
  std::size_t hits = 0;
  for (const std::string& token : target.vocabulary) {
    if (source.vocabulary.count(token)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(target.vocabulary.size());
}

inline double lo(const Domain& source, const Domain& target) {
  std::size_t hits = 0;
  for (const std::string& label : target.label_set) {
    if (source.label_set.count(label)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(target.label_set.size());
}

// token -> tf-idf weight of `d` against `universe`, recomputed from scratch.
inline std::map<std::string, double> tfidf(const Domain& d,
                                           const std::vector<Domain>& universe) {
  std::map<std::string, double> counts;
  double total = 0;
  for (const std::string& token : all_lower_tokens(d)) {
    counts[token] += 1;
    total += 1;
  }
  std::map<std::string, double> weights;
  for (const auto& [token, count] : counts) {
    int df = 0;
    for (const Domain& other : universe) {
      if (other.vocabulary.count(token)) ++df;
    }
    weights[token] = (count / total) *
                     std::log10(static_cast<double>(universe.size()) / df);
  }
  return weights;
}

inline double tis(const Domain& source, const Domain& target,
                  const std::vector<Domain>& universe) {
  const auto a = tfidf(source, universe);
  const auto b = tfidf(target, universe);
  double dot = 0, na = 0, nb = 0;
  for (const auto& [token, w] : a) {
    na += w * w;
    const auto it = b.find(token);
    if (it != b.end()) dot += w * it->second;
  }
  for (const auto& [token, w] : b) nb += w * w;
  if (na == 0 || nb == 0) return 0;
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  if (c < 0) c = 0;
  if (c > 1) c = 1;
  return c;
}

// Every (slot, begin, end) whose BIO pattern matches exactly.
inline std::vector<spsel::Span> spans(const std::vector<std::string>& labels) {
  std::vector<spsel::Span> out;
  const int n = static_cast<int>(labels.size());
  for (int begin = 0; begin < n; ++begin) {
    if (labels[begin].rfind("B-", 0) != 0) continue;
    const std::string slot = labels[begin].substr(2);
    int end = begin + 1;
    while (end < n && labels[end] == "I-" + slot) ++end;
    out.push_back({slot, begin, end});
  }
  return out;
}

// Contrastive loss by explicit ordered-pair enumeration (i != j), classes
// with fewer than two members skipped.
inline double contrastive(const Matrix& shared, const std::vector<int>& classes,
                          double tau) {
  const int n = static_cast<int>(shared.rows());
  auto cosine = [&](int i, int j) {
    const double na = shared.row(i).norm(), nb = shared.row(j).norm();
    if (na == 0 || nb == 0) return 0.0;
    return shared.row(i).dot(shared.row(j)) / (na * nb);
  };
  double denominator = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) denominator += std::exp(cosine(i, j) / tau);
    }
  }
  int max_class = 0;
  for (int c : classes) max_class = std::max(max_class, c);
  double total = 0;
  int used = 0;
  for (int c = 0; c <= max_class; ++c) {
    double numerator = 0;
    int members = 0;
    for (int i = 0; i < n; ++i) {
      if (classes[i] == c) ++members;
    }
    if (members < 2) continue;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && classes[i] == c && classes[j] == c) {
          numerator += std::exp(cosine(i, j) / tau);
        }
      }
    }
    total += -std::log(numerator / denominator);
    ++used;
  }
  return used == 0 ? 0.0 : total / used;
}

// Tiny random domain for fuzz tests: tokens drawn from a small shared pool
// so vocabularies overlap, slots likewise.
inline Domain random_domain(spsel::Rng& rng, const std::string& name) {
  static const std::vector<std::string> pool = {
      "alpha", "bravo", "charlie", "delta", "echo",  "foxtrot", "golf",
      "hotel", "india", "juliet",  "kilo",  "lima",  "mike",    "november"};
  static const std::vector<std::string> slots = {"city", "date", "artist", "genre"};
  const int n_sentences = 2 + static_cast<int>(rng.below(5));
  std::vector<LabeledSentence> sentences;
  for (int s = 0; s < n_sentences; ++s) {
    const int n_tokens = 2 + static_cast<int>(rng.below(5));
    LabeledSentence sentence;
    for (int i = 0; i < n_tokens; ++i) {
      sentence.tokens.push_back(pool[rng.below(pool.size())]);
      sentence.labels.push_back("O");
    }
    if (rng.below(4) != 0) {  // usually tag one span
      const std::string slot = slots[rng.below(slots.size())];
      const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_tokens)));
      sentence.labels[start] = "B-" + slot;
      if (start + 1 < n_tokens && rng.below(2) == 0) {
        sentence.labels[start + 1] = "I-" + slot;
      }
    }
    sentences.push_back(std::move(sentence));
  }
  return spsel::make_domain(name, std::move(sentences));
}

// Random valid BIO sequence over a small slot alphabet.
inline std::vector<std::string> random_bio(spsel::Rng& rng, int length) {
  static const std::vector<std::string> slots = {"city", "date", "artist"};
  std::vector<std::string> labels;
  int i = 0;
  while (i < length) {
    if (rng.below(2) == 0) {
      labels.push_back("O");
      ++i;
      continue;
    }
    const std::string slot = slots[rng.below(slots.size())];
    labels.push_back("B-" + slot);
    ++i;
    while (i < length && rng.below(3) == 0) {
      labels.push_back("I-" + slot);
      ++i;
    }
  }
  return labels;
}

}  // namespace oracle
