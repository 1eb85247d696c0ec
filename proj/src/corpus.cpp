#include "spsel/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "spsel/rng.hpp"

namespace spsel {

std::string slot_of(const std::string& label) {
  if (label.size() > 2 && (label[0] == 'B' || label[0] == 'I') && label[1] == '-') {
    return label.substr(2);
  }
  return "";
}

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

namespace {

bool is_valid_tag(const std::string& label) {
  if (label == "O") return true;
  return label.size() > 2 && (label[0] == 'B' || label[0] == 'I') && label[1] == '-';
}

}  // namespace

void validate_sentence(const LabeledSentence& sentence) {
  if (sentence.tokens.empty()) {
    throw ValidationError("sentence has no tokens");
  }
  if (sentence.tokens.size() != sentence.labels.size()) {
    std::ostringstream msg;
    msg << "token/label length mismatch: " << sentence.tokens.size()
        << " tokens vs " << sentence.labels.size() << " labels";
    throw ValidationError(msg.str());
  }
  std::string prev_slot;
  for (std::size_t i = 0; i < sentence.labels.size(); ++i) {
    const std::string& label = sentence.labels[i];
    if (!is_valid_tag(label)) {
      throw ValidationError("invalid BIO tag \"" + label + "\" at position " +
                            std::to_string(i));
    }
    if (label[0] == 'I') {
      const std::string slot = slot_of(label);
      if (slot != prev_slot) {
        throw ValidationError("invalid BIO sequence: \"" + label + "\" at position " +
                              std::to_string(i) + " does not continue a \"" + slot +
                              "\" span");
      }
    }
    prev_slot = slot_of(label);
  }
}

Domain make_domain(std::string name, std::vector<LabeledSentence> sentences) {
  Domain domain;
  domain.name = std::move(name);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    try {
      validate_sentence(sentences[i]);
    } catch (const ValidationError& e) {
      throw ValidationError("domain \"" + domain.name + "\", sentence " +
                            std::to_string(i) + ": " + e.what());
    }
    for (const std::string& token : sentences[i].tokens) {
      domain.vocabulary.insert(lowercase(token));
    }
    for (const std::string& label : sentences[i].labels) {
      const std::string slot = slot_of(label);
      if (!slot.empty()) domain.label_set.insert(slot);
    }
  }
  domain.sentences = std::move(sentences);
  return domain;
}

Domain load_domain(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open domain file: " + path);
  }
  std::vector<LabeledSentence> sentences;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": malformed JSON: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("tokens") || !obj.contains("labels")) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected object with \"tokens\" and \"labels\"");
    }
    LabeledSentence sentence;
    try {
      sentence.tokens = obj.at("tokens").get<std::vector<std::string>>();
      sentence.labels = obj.at("labels").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": fields must be arrays of strings: " + e.what());
    }
    try {
      validate_sentence(sentence);
    } catch (const ValidationError& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    sentences.push_back(std::move(sentence));
  }
  return make_domain(name, std::move(sentences));
}

void save_domain(const Domain& domain, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot write domain file: " + path);
  }
  for (const LabeledSentence& sentence : domain.sentences) {
    nlohmann::json obj;
    obj["tokens"] = sentence.tokens;
    obj["labels"] = sentence.labels;
    out << obj.dump() << "\n";
  }
}

Domain merge_domains(const std::vector<Domain>& domains, const std::string& name) {
  if (domains.empty()) {
    throw ValidationError("merge_domains: empty domain list");
  }
  std::vector<LabeledSentence> sentences;
  for (const Domain& domain : domains) {
    sentences.insert(sentences.end(), domain.sentences.begin(), domain.sentences.end());
  }
  return make_domain(name, std::move(sentences));
}

namespace {

std::set<std::string> sentence_slots(const LabeledSentence& sentence) {
  std::set<std::string> slots;
  for (const std::string& label : sentence.labels) {
    const std::string slot = slot_of(label);
    if (!slot.empty()) slots.insert(slot);
  }
  return slots;
}

}  // namespace

std::vector<Episode> build_episodes(const Domain& domain, int k, int n_episodes,
                                    std::uint64_t seed, int query_size) {
  if (k < 1) throw ValidationError("build_episodes: k must be >= 1");
  if (n_episodes < 1) throw ValidationError("build_episodes: n_episodes must be >= 1");
  if (domain.size() < 2) {
    throw ValidationError("build_episodes: domain \"" + domain.name +
                          "\" needs at least 2 sentences");
  }

  // Feasibility: a slot occurring in fewer than k sentences can never reach
  // its quota.
  std::map<std::string, int> sentence_counts;
  std::vector<std::set<std::string>> slots_per_sentence(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) {
    slots_per_sentence[i] = sentence_slots(domain.sentences[i]);
    for (const std::string& slot : slots_per_sentence[i]) sentence_counts[slot]++;
  }
  for (const std::string& slot : domain.label_set) {
    if (sentence_counts[slot] < k) {
      throw ValidationError("build_episodes: slot \"" + slot + "\" occurs in " +
                            std::to_string(sentence_counts[slot]) +
                            " sentences of domain \"" + domain.name +
                            "\", cannot satisfy k=" + std::to_string(k));
    }
  }

  std::vector<Episode> episodes;
  episodes.reserve(static_cast<std::size_t>(n_episodes));
  for (int e = 0; e < n_episodes; ++e) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(e) + 1));

    std::vector<std::size_t> order(domain.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    std::map<std::string, int> need;
    for (const std::string& slot : domain.label_set) need[slot] = k;

    std::vector<bool> in_support(domain.size(), false);
    std::vector<std::size_t> support_idx;
    auto outstanding = [&] {
      for (const auto& [slot, n] : need)
        if (n > 0) return true;
      return false;
    };
    while (outstanding()) {
      std::size_t best = order.size();
      int best_cover = 0;
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const std::size_t idx = order[pos];
        if (in_support[idx]) continue;
        int cover = 0;
        for (const std::string& slot : slots_per_sentence[idx]) {
          if (need[slot] > 0) ++cover;
        }
        if (cover > best_cover) {
          best_cover = cover;
          best = pos;
        }
      }
      if (best == order.size()) break;  // nothing left to cover
      const std::size_t idx = order[best];
      in_support[idx] = true;
      support_idx.push_back(idx);
      for (const std::string& slot : slots_per_sentence[idx]) need[slot]--;
    }
    if (support_idx.empty()) {
      // Domain without slots: keep the episode non-degenerate.
      support_idx.push_back(order[0]);
      in_support[order[0]] = true;
    }

    std::vector<std::size_t> remainder;
    for (std::size_t idx : order) {
      if (!in_support[idx]) remainder.push_back(idx);
    }
    rng.shuffle(remainder);
    const std::size_t q = std::min<std::size_t>(
        remainder.size(), static_cast<std::size_t>(std::max(0, query_size)));
    remainder.resize(q);

    Episode episode;
    episode.k = k;
    for (std::size_t idx : support_idx) episode.support.push_back(domain.sentences[idx]);
    for (std::size_t idx : remainder) episode.query.push_back(domain.sentences[idx]);
    for (const LabeledSentence& sentence : episode.support) {
      for (const std::string& label : sentence.labels) {
        const std::string slot = slot_of(label);
        if (slot.empty()) continue;
        if (std::find(episode.label_inventory.begin(), episode.label_inventory.end(),
                      slot) == episode.label_inventory.end()) {
          episode.label_inventory.push_back(slot);
        }
      }
    }
    episodes.push_back(std::move(episode));
  }
  return episodes;
}

void save_episodes(const std::vector<Episode>& episodes, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot write episode file: " + path);
  }
  for (const Episode& episode : episodes) {
    nlohmann::json obj;
    auto dump_set = [](const std::vector<LabeledSentence>& sentences) {
      nlohmann::json arr = nlohmann::json::array();
      for (const LabeledSentence& sentence : sentences) {
        arr.push_back({{"tokens", sentence.tokens}, {"labels", sentence.labels}});
      }
      return arr;
    };
    obj["support"] = dump_set(episode.support);
    obj["query"] = dump_set(episode.query);
    obj["k"] = episode.k;
    out << obj.dump() << "\n";
  }
}

}  // namespace spsel
