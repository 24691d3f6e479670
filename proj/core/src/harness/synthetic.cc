// Copyright 2026 The invlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "invlab/harness/synthetic.h"

#include <array>
#include <fstream>
#include <string_view>

#include "invlab/error.h"
#include "invlab/rng.h"
#include "json.hpp"

namespace invlab::harness {

namespace {

constexpr std::array<std::string_view, 40> kFirstNames = {
    "alice",  "bruno",  "carmen", "dmitri", "elena",  "farid",  "greta",
    "hiro",   "ingrid", "jamal",  "keiko",  "lars",   "maya",   "nikolai",
    "olga",   "pedro",  "quinn",  "rosa",   "samir",  "tessa",  "umar",
    "vera",   "wesley", "ximena", "yusuf",  "zara",   "aaron",  "bianca",
    "caleb",  "daria",  "emil",   "fiona",  "gustav", "hana",   "ivan",
    "julia",  "kofi",   "leila",  "marco",  "nadia"};

constexpr std::array<std::string_view, 40> kLastNames = {
    "smith",    "garcia",  "tanaka",   "novak",   "okafor",  "larsen",
    "moreau",   "kowalski", "haddad",  "silva",   "nguyen",  "fischer",
    "rossi",    "ivanova",  "mendes",  "kim",     "obrien",  "schulz",
    "petrov",   "dubois",   "yamamoto", "costa",  "jensen",  "ali",
    "romero",   "weber",    "sato",    "lindqvist", "bauer", "castillo",
    "popescu",  "hughes",   "varga",   "mensah",  "keller",  "moretti",
    "sousa",    "nowak",    "bergman", "reyes"};

constexpr std::array<std::string_view, 20> kHobbies = {
    "hiking",   "painting", "chess",    "gardening", "cooking",
    "swimming", "reading",  "dancing",  "fishing",   "cycling",
    "knitting", "surfing",  "climbing", "baking",    "running",
    "singing",  "camping",  "drawing",  "skiing",    "photography"};

constexpr std::array<std::string_view, 20> kPlaces = {
    "fresno",  "boston",   "denver", "seattle", "chicago", "austin",
    "miami",   "portland", "dallas", "atlanta", "phoenix", "toronto",
    "london",  "paris",    "berlin", "madrid",  "tokyo",   "sydney",
    "dublin",  "oslo"};

constexpr std::array<std::string_view, 16> kJobs = {
    "teacher", "nurse",    "chef",     "pilot",   "lawyer",  "farmer",
    "dentist", "engineer", "plumber",  "painter", "baker",   "doctor",
    "writer",  "mechanic", "musician", "librarian"};

constexpr std::array<std::string_view, 16> kFoods = {
    "pizza",   "sushi",  "tacos",  "pasta",    "curry",  "burgers",
    "noodles", "salads", "steak",  "pancakes", "soup",   "dumplings",
    "waffles", "ramen",  "chili",  "falafel"};

constexpr std::array<std::string_view, 8> kRelations = {
    "mother", "father", "sister", "brother",
    "wife",   "husband", "cousin", "roommate"};

constexpr std::array<std::string_view, 10> kAnimals = {
    "dog", "cat", "parrot", "rabbit", "hamster",
    "turtle", "horse", "goat", "snake", "lizard"};

constexpr std::array<std::string_view, 8> kColors = {
    "black", "white", "brown", "gray", "golden", "red", "green", "spotted"};

constexpr std::array<std::string_view, 6> kTimes = {
    "week", "month", "year", "summer", "winter", "spring"};

// Slots: {E} entity, {H} hobby, {P} place, {J} job, {F} food, {R} relation,
// {A} animal, {C} color, {T} time. Short templates keep sentences within
// about a dozen tokens.
struct Template {
  std::string_view pattern;
  bool has_entity;
};

constexpr std::array<Template, 14> kTemplates = {{
    {"my name is {E} and i like {H}", true},
    {"hi i am {E} and i live in {P}", true},
    {"{E} works as a {J} in {P}", true},
    {"my friend {E} loves {F} and {H}", true},
    {"have you ever met {E} ?", true},
    {"{E} and i went to {P} last {T}", true},
    {"i went to {P} with {E} to eat {F}", true},
    {"i am a {J} and i enjoy {H} on the weekends", false},
    {"my favorite food is {F} but i also like {F}", false},
    {"do you like {H} ?", false},
    {"i have a {C} {A} that i walk every day", false},
    {"i live in {P} with my {R} and my {A}", false},
    {"what do you do for a living ?", false},
    {"my {R} is a {J} from {P}", false},
}};

template <std::size_t N>
std::string_view Pick(Rng& rng, const std::array<std::string_view, N>& items) {
  return items[rng.Below(N)];
}

}  // namespace

std::size_t MaxSyntheticEntities() {
  return kFirstNames.size() * kLastNames.size();
}

std::vector<std::string> SyntheticEntities(std::size_t count, std::uint64_t seed) {
  if (count < 1 || count > MaxSyntheticEntities()) {
    throw InvalidArgument("entity count must lie in [1, " +
                          std::to_string(MaxSyntheticEntities()) + "]");
  }
  std::vector<std::size_t> combos(MaxSyntheticEntities());
  for (std::size_t i = 0; i < combos.size(); ++i) combos[i] = i;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  rng.Shuffle(std::span<std::size_t>(combos));
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t c = combos[i];
    out.push_back(std::string(kFirstNames[c / kLastNames.size()]) + " " +
                  std::string(kLastNames[c % kLastNames.size()]));
  }
  return out;
}

std::vector<std::string> SyntheticRecords(const SyntheticOptions& options) {
  if (options.sentences < 1) throw InvalidArgument("sentence count must be >= 1");
  const auto entities = SyntheticEntities(options.entities, options.seed);
  Rng rng(options.seed);
  std::vector<std::string> records;
  records.reserve(options.sentences);
  for (std::size_t n = 0; n < options.sentences; ++n) {
    const Template& tmpl = kTemplates[rng.Below(kTemplates.size())];
    std::string text;
    std::vector<std::string> mentioned;
    std::string_view p = tmpl.pattern;
    while (!p.empty()) {
      const auto open = p.find('{');
      if (open == std::string_view::npos) {
        text += p;
        break;
      }
      text += p.substr(0, open);
      const char slot = p[open + 1];
      p.remove_prefix(open + 3);
      switch (slot) {
        case 'E': {
          const std::string& e = entities[rng.Below(entities.size())];
          text += e;
          mentioned.push_back(e);
          break;
        }
        case 'H': text += Pick(rng, kHobbies); break;
        case 'P': text += Pick(rng, kPlaces); break;
        case 'J': text += Pick(rng, kJobs); break;
        case 'F': text += Pick(rng, kFoods); break;
        case 'R': text += Pick(rng, kRelations); break;
        case 'A': text += Pick(rng, kAnimals); break;
        case 'C': text += Pick(rng, kColors); break;
        case 'T': text += Pick(rng, kTimes); break;
        default: throw Error("bad template slot");
      }
    }
    nlohmann::json record;
    record["text"] = text;
    record["entities"] = mentioned;
    records.push_back(record.dump());
  }
  return records;
}

void WriteSyntheticCorpus(const SyntheticOptions& options,
                          const std::filesystem::path& path) {
  const auto records = SyntheticRecords(options);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : records) out << r << '\n';
}

const std::vector<std::string>& StopwordList() {
  static const std::vector<std::string> words = {
      "a",     "about",  "above", "after", "again",  "all",   "also",
      "am",    "an",     "and",   "any",   "are",    "as",    "at",
      "be",    "been",   "before", "being", "below", "between", "both",
      "but",   "by",     "can",   "could", "did",    "do",    "does",
      "doing", "down",   "during", "each", "ever",   "every", "few",
      "for",   "from",   "further", "had", "has",    "have",  "having",
      "he",    "her",    "here",  "hers",  "herself", "him",  "himself",
      "his",   "how",    "i",     "if",    "in",     "into",  "is",
      "it",    "its",    "itself", "just", "last",   "me",    "more",
      "most",  "my",     "myself", "no",   "nor",    "not",   "now",
      "of",    "off",    "on",    "once",  "only",   "or",    "other",
      "our",   "ours",   "out",   "over",  "own",    "same",  "she",
      "should", "so",    "some",  "such",  "than",   "that",  "the",
      "their", "theirs", "them",  "then",  "there",  "these", "they",
      "this",  "those",  "through", "to",  "too",    "under", "until",
      "up",    "very",   "was",   "we",    "were",   "what",  "when",
      "where", "which",  "while", "who",   "whom",   "why",   "will",
      "with",  "would",  "you",   "your",  "yours",  "yourself"};
  return words;
}

void WriteStopwordList(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& w : StopwordList()) out << w << '\n';
}

}  // namespace invlab::harness
