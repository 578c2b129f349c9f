#pragma once

// Seeded generator of English-like sentences from a small probabilistic
// grammar. Used as "natural" text for the LM checks: word order carries
// signal an n-gram model can learn, and a word-shuffled copy destroys it.

#include <random>
#include <string>
#include <vector>

namespace synthetic {

class Grammar {
 public:
  explicit Grammar(std::uint64_t seed) : rng_(seed) {}

  std::string sentence() {
    std::string s = clause();
    const double r = unit();
    if (r < 0.25) s += " , and " + clause();
    else if (r < 0.40) s += " because " + clause();
    else if (r < 0.50) s += " while " + clause();
    return s + (unit() < 0.9 ? " ." : " !");
  }

  std::vector<std::string> sentences(std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sentence());
    return out;
  }

 private:
  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  // Zipf-like pick: earlier entries are more frequent.
  const std::string& pick(const std::vector<std::string>& v) {
    std::vector<double> w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = 1.0 / static_cast<double>(i + 1);
    std::discrete_distribution<std::size_t> d(w.begin(), w.end());
    return v[d(rng_)];
  }

  std::string noun_phrase() {
    static const std::vector<std::string> det{"the", "a", "this", "every", "some", "my", "our", "their", "that"};
    static const std::vector<std::string> adj{"old",   "small",  "red",   "quiet", "new",   "heavy", "bright",
                                              "tired", "famous", "young", "empty", "green", "strange", "warm"};
    static const std::vector<std::string> noun{
        "man",     "woman",  "child",  "teacher", "dog",    "house",  "city",   "river",  "book",   "letter",
        "car",     "garden", "window", "doctor",  "friend", "market", "street", "train",  "table",  "school",
        "village", "farmer", "bridge", "song",    "story",  "horse",  "forest", "church", "island", "painter"};
    std::string s = pick(det);
    if (unit() < 0.45) s += " " + pick(adj);
    s += " " + pick(noun);
    if (unit() < 0.15) s += " " + pick(std::vector<std::string>{"of the town", "in the corner", "from the north",
                                                                "with the blue door", "near the sea"});
    return s;
  }

  std::string clause() {
    static const std::vector<std::string> trans{"saw",    "found", "liked",  "opened", "carried", "built",
                                                "visited", "sold", "painted", "wrote", "watched", "followed"};
    static const std::vector<std::string> intrans{"slept", "arrived", "laughed", "waited", "disappeared", "sang"};
    static const std::vector<std::string> adv{"yesterday", "again", "slowly", "at night", "in the morning",
                                              "last year", "quickly", "for hours"};
    std::string s = noun_phrase();
    if (unit() < 0.7) s += " " + pick(trans) + " " + noun_phrase();
    else s += " " + pick(intrans);
    if (unit() < 0.4) s += " " + pick(adv);
    return s;
  }

  std::mt19937_64 rng_;
};

}  // namespace synthetic
