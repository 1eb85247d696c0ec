#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "spsel/corpus.hpp"
#include "spsel/rng.hpp"
#include "spsel/similarity.hpp"

using namespace spsel;

namespace {

Domain from_text(const std::string& name, const std::vector<std::string>& sentences) {
  std::vector<LabeledSentence> labeled;
  for (const std::string& text : sentences) {
    LabeledSentence s;
    std::stringstream ss(text);
    std::string token;
    while (ss >> token) {
      s.tokens.push_back(token);
      s.labels.push_back("O");
    }
    labeled.push_back(std::move(s));
  }
  return make_domain(name, std::move(labeled));
}

}  // namespace

TEST_CASE("tvc is the covered fraction of the target vocabulary") {
  const Domain src = from_text("src", {"book a ticket to london"});
  const Domain tgt = from_text("tgt", {"book flight to paris"});
  CHECK(tvc(src, tgt) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tvc(tgt, tgt) == 1.0);
  const Domain disjoint = from_text("d", {"x y z"});
  CHECK(tvc(disjoint, tgt) == 0.0);
}

TEST_CASE("tvc rejects an empty target vocabulary") {
  const Domain src = from_text("src", {"a"});
  Domain empty;
  empty.name = "empty";
  CHECK_THROWS_AS(tvc(src, empty), ValidationError);
}

TEST_CASE("tf-idf weights match hand computation") {
  const Domain d1 = from_text("d1", {"book ticket book"});
  const Domain d2 = from_text("d2", {"play music"});
  const auto vectors = tfidf_vectors({d1, d2});
  REQUIRE(vectors.size() == 2);
  CHECK(vectors[0].domain_name == "d1");
  // tf(book, d1) = 2/3, idf = log10(2/1)
  CHECK(vectors[0].weights.at("book") ==
        doctest::Approx((2.0 / 3.0) * std::log10(2.0)).epsilon(1e-12));
  CHECK(vectors[0].weights.at("book") == doctest::Approx(0.20069).epsilon(1e-4));

  // a token present in both of 2 domains has weight 0
  const Domain d3 = from_text("d3", {"book extra"});
  const auto both = tfidf_vectors({d1, d3});
  CHECK(both[0].weights.at("book") == 0.0);
  CHECK(both[1].weights.at("book") == 0.0);

  // single unique token: tf = 1, weight = log10(2)
  const Domain single = from_text("s", {"a"});
  const auto pair = tfidf_vectors({single, d2});
  CHECK(pair[0].weights.at("a") == doctest::Approx(std::log10(2.0)).epsilon(1e-15));
}

TEST_CASE("tf-idf requires at least two domains with tokens") {
  const Domain d1 = from_text("d1", {"a"});
  CHECK_THROWS_AS(tfidf_vectors({d1}), ValidationError);
}

TEST_CASE("tis basics") {
  const Domain d1 = from_text("d1", {"alpha beta alpha"});
  const Domain d2 = from_text("d2", {"gamma delta"});
  const Domain d3 = from_text("d3", {"alpha epsilon zeta"});
  const std::vector<Domain> universe = {d1, d2, d3};

  SUBCASE("disjoint unique-token supports are orthogonal") {
    CHECK(tis(d1, d2, universe) == 0.0);
  }
  SUBCASE("self-cosine is 1 when a unique token exists") {
    CHECK(tis(d1, d1, universe) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("matches the brute-force oracle") {
    CHECK(tis(d1, d3, universe) ==
          doctest::Approx(oracle::tis(d1, d3, universe)).epsilon(1e-12));
  }
  SUBCASE("membership is checked through document frequencies") {
    const Domain stranger = from_text("x", {"unseen words here"});
    CHECK_THROWS_AS(tis(stranger, d1, universe), ValidationError);
  }
  SUBCASE("merged subsets of the universe are scoreable") {
    const Domain merged = merge_domains({d1, d2}, "m");
    CHECK_NOTHROW(tis(merged, d3, universe));
  }
}

TEST_CASE("lo label overlap") {
  const Domain src = make_domain(
      "src", {{{"to", "london"}, {"O", "B-city"}}, {{"on", "monday"}, {"O", "B-date"}}});
  const Domain tgt = make_domain(
      "tgt", {{{"in", "paris"}, {"O", "B-city"}}, {{"play", "adele"}, {"O", "B-artist"}}});
  CHECK(lo(src, tgt) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(lo(tgt, tgt) == 1.0);
  const Domain other = make_domain("o", {{{"x"}, {"B-genre"}}});
  CHECK(lo(other, tgt) == 0.0);

  SUBCASE("empty target label set is rejected") {
    const Domain unlabeled = make_domain("u", {{{"a"}, {"O"}}});
    CHECK_THROWS_AS(lo(src, unlabeled), ValidationError);
  }

  SUBCASE("raw BIO policy keeps O and prefixes") {
    const Domain unlabeled = make_domain("u", {{{"a"}, {"O"}}});
    // under raw tags, {O} vs {O, B-city, B-date}: 1/3 covered from src's view
    CHECK(lo(unlabeled, src, LabelPolicy::kRawBio) == doctest::Approx(1.0 / 3.0));
    CHECK(lo(src, unlabeled, LabelPolicy::kRawBio) == 1.0);
  }
}

TEST_CASE("triple bundles the three indicators") {
  Rng rng(91);
  const Domain a = oracle::random_domain(rng, "a");
  const Domain b = oracle::random_domain(rng, "b");
  const std::vector<Domain> universe = {a, b};
  const SimilarityTriple t = triple(a, b, universe);
  CHECK(t.tvc == tvc(a, b));
  CHECK(t.tis == tis(a, b, universe));
  CHECK(t.lo == lo(a, b));
  CHECK(t.source_name == "a");
  CHECK(t.target_name == "b");

  const SimilarityTriple self = triple(a, a, universe);
  CHECK(self.tvc == 1.0);
  CHECK(self.tis == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(self.lo == 1.0);
}

TEST_CASE("all indicators stay in [0,1] over 1000 random pairs") {
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const Domain a = oracle::random_domain(rng, "a");
    const Domain b = oracle::random_domain(rng, "b");
    if (b.label_set.empty() || a.label_set.empty()) continue;
    const std::vector<Domain> universe = {a, b};
    const SimilarityTriple t = triple(a, b, universe);
    CHECK(t.tvc >= 0.0);
    CHECK(t.tvc <= 1.0);
    CHECK(t.tis >= 0.0);
    CHECK(t.tis <= 1.0);
    CHECK(t.lo >= 0.0);
    CHECK(t.lo <= 1.0);
  }
}

TEST_CASE("tvc and lo are monotone under source merging") {
  Rng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const Domain a = oracle::random_domain(rng, "a");
    const Domain b = oracle::random_domain(rng, "b");
    const Domain t = oracle::random_domain(rng, "t");
    const Domain merged = merge_domains({a, b}, "ab");
    CHECK(tvc(merged, t) >= std::max(tvc(a, t), tvc(b, t)));
    if (!t.label_set.empty()) {
      CHECK(lo(merged, t) >= std::max(lo(a, t), lo(b, t)));
    }
  }
}

TEST_CASE("tis is symmetric; tvc and lo are not") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const Domain a = oracle::random_domain(rng, "a");
    const Domain b = oracle::random_domain(rng, "b");
    const std::vector<Domain> universe = {a, b};
    CHECK(tis(a, b, universe) == doctest::Approx(tis(b, a, universe)).epsilon(1e-12));
  }

  // asymmetric witness
  const Domain small = make_domain("s", {{{"a"}, {"B-city"}}});
  const Domain large = make_domain(
      "l", {{{"a", "b"}, {"B-city", "O"}}, {{"c"}, {"B-date"}}});
  CHECK(tvc(small, large) == doctest::Approx(1.0 / 3.0));
  CHECK(tvc(large, small) == 1.0);
  CHECK(lo(small, large) == doctest::Approx(0.5));
  CHECK(lo(large, small) == 1.0);
}

TEST_CASE("indicators equal the brute-force oracle on 50 random universes") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Domain> universe;
    const int m = 2 + static_cast<int>(rng.below(3));
    for (int i = 0; i < m; ++i) {
      universe.push_back(oracle::random_domain(rng, "d" + std::to_string(i)));
    }
    for (int s = 0; s < m; ++s) {
      for (int t = 0; t < m; ++t) {
        if (s == t) continue;
        const Domain& src = universe[static_cast<std::size_t>(s)];
        const Domain& tgt = universe[static_cast<std::size_t>(t)];
        CHECK(tvc(src, tgt) == doctest::Approx(oracle::tvc(src, tgt)).epsilon(1e-12));
        CHECK(tis(src, tgt, universe) ==
              doctest::Approx(oracle::tis(src, tgt, universe)).epsilon(1e-12));
        if (!tgt.label_set.empty()) {
          CHECK(lo(src, tgt) == doctest::Approx(oracle::lo(src, tgt)).epsilon(1e-12));
        }
      }
    }
  }
}
