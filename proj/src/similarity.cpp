#include "spsel/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace spsel {

namespace {

std::size_t intersection_size(const std::set<std::string>& a,
                              const std::set<std::string>& b) {
  std::size_t n = 0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (const std::string& x : small) {
    if (large.count(x)) ++n;
  }
  return n;
}

std::set<std::string> raw_tag_set(const Domain& domain) {
  std::set<std::string> tags;
  for (const LabeledSentence& sentence : domain.sentences) {
    tags.insert(sentence.labels.begin(), sentence.labels.end());
  }
  return tags;
}

}  // namespace

double tvc(const Domain& source, const Domain& target) {
  if (target.vocabulary.empty()) {
    throw ValidationError("tvc: target domain \"" + target.name +
                          "\" has an empty vocabulary");
  }
  return static_cast<double>(intersection_size(source.vocabulary, target.vocabulary)) /
         static_cast<double>(target.vocabulary.size());
}

double lo(const Domain& source, const Domain& target, LabelPolicy policy) {
  std::set<std::string> source_labels, target_labels;
  if (policy == LabelPolicy::kSlotNames) {
    source_labels = source.label_set;
    target_labels = target.label_set;
  } else {
    source_labels = raw_tag_set(source);
    target_labels = raw_tag_set(target);
  }
  if (target_labels.empty()) {
    throw ValidationError("lo: target domain \"" + target.name +
                          "\" has an empty label set under the configured policy");
  }
  return static_cast<double>(intersection_size(source_labels, target_labels)) /
         static_cast<double>(target_labels.size());
}

TfIdfStats::TfIdfStats(const std::vector<Domain>& universe)
    : universe_size_(universe.size()) {
  if (universe.size() < 2) {
    throw ValidationError("tf-idf: universe needs at least 2 domains");
  }
  for (const Domain& domain : universe) {
    bool any_token = false;
    for (const LabeledSentence& sentence : domain.sentences) {
      any_token |= !sentence.tokens.empty();
    }
    if (!any_token) {
      throw ValidationError("tf-idf: domain \"" + domain.name + "\" has no tokens");
    }
    for (const std::string& token : domain.vocabulary) {
      document_frequency_[token]++;
    }
  }
}

TfIdfVector TfIdfStats::vector_for(const Domain& domain) const {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const LabeledSentence& sentence : domain.sentences) {
    for (const std::string& token : sentence.tokens) {
      counts[lowercase(token)]++;
      ++total;
    }
  }
  TfIdfVector vec;
  vec.domain_name = domain.name;
  for (const auto& [token, count] : counts) {
    const auto df = document_frequency_.find(token);
    if (df == document_frequency_.end()) {
      throw ValidationError("tf-idf: domain \"" + domain.name + "\" is not in the universe (token \"" +
                            token + "\" has no document frequency)");
    }
    const double tf = static_cast<double>(count) / static_cast<double>(total);
    const double idf = std::log10(static_cast<double>(universe_size_) /
                                  static_cast<double>(df->second));
    vec.weights[token] = tf * idf;
  }
  return vec;
}

double TfIdfStats::cosine(const TfIdfVector& a, const TfIdfVector& b) {
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (const auto& [token, w] : a.weights) norm_a += w * w;
  for (const auto& [token, w] : b.weights) norm_b += w * w;
  const auto& small = a.weights.size() <= b.weights.size() ? a.weights : b.weights;
  const auto& large = a.weights.size() <= b.weights.size() ? b.weights : a.weights;
  for (const auto& [token, w] : small) {
    const auto it = large.find(token);
    if (it != large.end()) dot += w * it->second;
  }
  if (norm_a <= 0.0 || norm_b <= 0.0) return 0.0;
  const double c = dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
  return std::clamp(c, 0.0, 1.0);
}

std::vector<TfIdfVector> tfidf_vectors(const std::vector<Domain>& universe) {
  TfIdfStats stats(universe);
  std::vector<TfIdfVector> vectors;
  vectors.reserve(universe.size());
  for (const Domain& domain : universe) {
    vectors.push_back(stats.vector_for(domain));
  }
  return vectors;
}

double tis(const Domain& source, const Domain& target,
           const std::vector<Domain>& universe) {
  TfIdfStats stats(universe);
  return TfIdfStats::cosine(stats.vector_for(source), stats.vector_for(target));
}

SimilarityTriple triple(const Domain& source, const Domain& target,
                        const std::vector<Domain>& universe, LabelPolicy policy) {
  SimilarityTriple t;
  t.source_name = source.name;
  t.target_name = target.name;
  t.tvc = tvc(source, target);
  t.tis = tis(source, target, universe);
  t.lo = lo(source, target, policy);
  return t;
}

}  // namespace spsel
