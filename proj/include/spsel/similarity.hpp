#pragma once

#include <map>
#include <string>
#include <vector>

#include "spsel/corpus.hpp"
#include "spsel/types.hpp"

namespace spsel {

// tf-idf weights of one domain treated as a document. tf is the token's
// occurrence count over the domain's total token count; idf is the base-10
// logarithm of the universe size over the token's document frequency.
struct TfIdfVector {
  std::string domain_name;
  std::map<std::string, double> weights;
};

struct SimilarityTriple {
  double tvc = 0.0;
  double tis = 0.0;
  double lo = 0.0;
  std::string source_name;
  std::string target_name;
};

// Label-overlap policy: SlotNames strips BIO prefixes and excludes "O"
// (default); RawBio compares raw tag strings including "O".
enum class LabelPolicy { kSlotNames, kRawBio };

// Fraction of the target vocabulary covered by the source vocabulary.
double tvc(const Domain& source, const Domain& target);

// Fraction of the target label set covered by the source label set.
double lo(const Domain& source, const Domain& target,
          LabelPolicy policy = LabelPolicy::kSlotNames);

// idf statistics over a fixed universe of domains. Vectors can be produced
// for any domain assembled from universe text (members and merged subsets);
// a domain containing a token unknown to the universe is rejected.
class TfIdfStats {
 public:
  explicit TfIdfStats(const std::vector<Domain>& universe);

  TfIdfVector vector_for(const Domain& domain) const;

  static double cosine(const TfIdfVector& a, const TfIdfVector& b);

  std::size_t universe_size() const { return universe_size_; }

 private:
  std::map<std::string, int> document_frequency_;
  std::size_t universe_size_ = 0;
};

// One vector per universe member.
std::vector<TfIdfVector> tfidf_vectors(const std::vector<Domain>& universe);

// Cosine similarity of the two domains' tf-idf vectors under the universe's
// idf statistics; 0 when either vector has zero norm.
double tis(const Domain& source, const Domain& target,
           const std::vector<Domain>& universe);

SimilarityTriple triple(const Domain& source, const Domain& target,
                        const std::vector<Domain>& universe,
                        LabelPolicy policy = LabelPolicy::kSlotNames);

}  // namespace spsel
