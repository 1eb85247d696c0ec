#include "spsel/benchmark.hpp"

#include <sstream>

#include "spsel/rng.hpp"

namespace spsel {

namespace {

// A template piece is either a literal carrier word or a slot placeholder.
struct Piece {
  std::string text;
  bool is_slot = false;
};

using Template = std::vector<Piece>;

Piece word(std::string w) { return Piece{std::move(w), false}; }
Piece slot(std::string name) { return Piece{std::move(name), true}; }

Template parse(const std::string& pattern) {
  Template t;
  std::stringstream ss(pattern);
  std::string token;
  while (ss >> token) {
    if (token.size() > 2 && token.front() == '{' && token.back() == '}') {
      t.push_back(slot(token.substr(1, token.size() - 2)));
    } else {
      t.push_back(word(token));
    }
  }
  return t;
}

struct SlotPool {
  std::string name;
  std::vector<std::string> values;  // values may be multi-token
};

struct DomainSpec {
  std::string name;
  std::vector<Template> templates;
  std::vector<SlotPool> slots;
};

const std::vector<std::string>& pool(const SlotPool& p) { return p.values; }

LabeledSentence realize(const DomainSpec& spec, const Template& tmpl, Rng& rng) {
  LabeledSentence sentence;
  for (const Piece& piece : tmpl) {
    if (!piece.is_slot) {
      sentence.tokens.push_back(piece.text);
      sentence.labels.push_back("O");
      continue;
    }
    const SlotPool* sp = nullptr;
    for (const SlotPool& candidate : spec.slots) {
      if (candidate.name == piece.text) sp = &candidate;
    }
    const std::string& value = pool(*sp)[rng.below(pool(*sp).size())];
    std::stringstream ss(value);
    std::string token;
    bool first = true;
    while (ss >> token) {
      sentence.tokens.push_back(token);
      sentence.labels.push_back((first ? "B-" : "I-") + piece.text);
      first = false;
    }
  }
  return sentence;
}

Domain realize_domain(const DomainSpec& spec, int n_sentences, std::uint64_t seed) {
  Rng rng(mix_seed(seed, fnv1a64(spec.name)));
  std::vector<LabeledSentence> sentences;
  sentences.reserve(static_cast<std::size_t>(n_sentences));
  // Round-robin over templates so every slot keeps a healthy sentence count,
  // with seeded values inside.
  for (int i = 0; i < n_sentences; ++i) {
    const Template& tmpl = spec.templates[static_cast<std::size_t>(i) % spec.templates.size()];
    sentences.push_back(realize(spec, tmpl, rng));
  }
  return make_domain(spec.name, std::move(sentences));
}

std::vector<std::string> slice(const std::vector<std::string>& v, std::size_t lo,
                               std::size_t hi) {
  return {v.begin() + static_cast<std::ptrdiff_t>(lo),
          v.begin() + static_cast<std::ptrdiff_t>(hi)};
}

}  // namespace

std::vector<Domain> generate_benchmark(const BenchConfig& config) {
  const std::vector<std::string> cities = {"london", "paris",  "berlin",   "tokyo",
                                           "madrid", "rome",   "new york", "hong kong"};
  const std::vector<std::string> dates = {"monday", "tuesday", "friday",   "sunday",
                                          "today",  "tomorrow", "next week"};
  const std::vector<std::string> artists = {"adele",   "drake",    "queen",
                                            "nirvana", "madonna",  "coldplay",
                                            "daft punk"};
  const std::vector<std::string> genres = {"jazz", "rock", "pop", "blues", "metal",
                                           "techno"};

  const std::vector<Template> travel_templates = {
      parse("book a flight to {city} on {date}"),
      parse("reserve a hotel in {city} for {date}"),
      parse("plan a trip to {city}"),
      parse("find me a flight to {city} leaving {date}"),
      parse("show flights to {city}"),
      parse("please book a seat to {city} on {date}"),
      parse("thanks for the help"),
  };
  const std::vector<Template> media_templates = {
      parse("play some {genre} by {artist}"),
      parse("queue the new album by {artist}"),
      parse("stream {genre} music now"),
      parse("play {artist} please"),
      parse("add some {genre} to the playlist"),
      parse("find the album by {artist}"),
      parse("stop the music"),
  };

  DomainSpec tra{"tra", travel_templates,
                 {{"city", slice(cities, 0, 6)}, {"date", slice(dates, 0, 5)}}};
  DomainSpec trb{"trb", travel_templates,
                 {{"city", slice(cities, 2, 8)}, {"date", slice(dates, 2, 7)}}};
  DomainSpec mea{"mea", media_templates,
                 {{"genre", slice(genres, 0, 4)}, {"artist", slice(artists, 0, 5)}}};
  DomainSpec meb{"meb", media_templates,
                 {{"genre", slice(genres, 2, 6)}, {"artist", slice(artists, 2, 7)}}};

  // The cross domain reuses every family's slot values under a single
  // "thing" label, so tokens that the families keep apart (cities vs dates,
  // artists vs genres) are pushed into one class here.
  std::vector<std::string> things;
  things.insert(things.end(), cities.begin(), cities.end());
  things.insert(things.end(), dates.begin(), dates.end());
  things.insert(things.end(), artists.begin(), artists.end());
  things.insert(things.end(), genres.begin(), genres.end());
  things.push_back("flight");
  things.push_back("album");
  DomainSpec crx{"crx",
                 {
                     parse("host the gala at {thing} with {thing}"),
                     parse("please book {thing} for the gala"),
                     parse("arrange the fair featuring {thing}"),
                     parse("the committee picked {thing} over {thing}"),
                     parse("register {thing} for the contest"),
                     parse("show the schedule for {thing}"),
                 },
                 {{"thing", things}}};

  std::vector<std::string> adv_a, adv_b;
  for (int i = 1; i <= 8; ++i) adv_a.push_back("zva" + std::to_string(i));
  for (int i = 1; i <= 8; ++i) adv_b.push_back("zvb" + std::to_string(i));
  DomainSpec adv{"adv",
                 {
                     parse("zq1 zq2 {zslota} zq3 {zslotb}"),
                     parse("zq4 {zslota} zq5 zq6"),
                     parse("zq7 zq8 zq9 {zslotb}"),
                     parse("zq2 {zslotb} zq10 {zslota} zq11"),
                     parse("zq12 zq5 {zslota}"),
                 },
                 {{"zslota", adv_a}, {"zslotb", adv_b}}};

  std::vector<Domain> domains;
  domains.push_back(realize_domain(tra, config.family_sentences, config.seed));
  domains.push_back(realize_domain(trb, config.family_sentences, config.seed));
  domains.push_back(realize_domain(mea, config.family_sentences, config.seed));
  domains.push_back(realize_domain(meb, config.family_sentences, config.seed));
  domains.push_back(realize_domain(crx, config.cross_sentences, config.seed));
  domains.push_back(realize_domain(adv, config.adversarial_sentences, config.seed));
  return domains;
}

}  // namespace spsel
