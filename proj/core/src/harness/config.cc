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

#include "invlab/harness/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "invlab/error.h"
#include "invlab/hash.h"

namespace invlab::harness {

namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value,
                           std::string_view want) {
  throw InvalidArgument("config key '" + std::string(key) + "': '" +
                        std::string(value) + "' is not " + std::string(want));
}

template <typename N>
N ParseNumber(std::string_view key, std::string_view v, std::string_view want) {
  N out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) BadValue(key, v, want);
  return out;
}

bool ParseBool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  BadValue(key, v, "a boolean");
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct Field {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view, std::string_view)> set;
};

template <typename M>
Field Bind(M ExperimentConfig::*section, auto M::*member) {
  using V = std::remove_reference_t<decltype(std::declval<M>().*member)>;
  Field f;
  f.get = [=](const ExperimentConfig& c) -> std::string {
    const V& v = c.*section.*member;
    if constexpr (std::is_same_v<V, std::string>) {
      return v;
    } else if constexpr (std::is_same_v<V, bool>) {
      return v ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<V>) {
      return FormatDouble(v);
    } else {
      return std::to_string(v);
    }
  };
  f.set = [=](ExperimentConfig& c, std::string_view key, std::string_view s) {
    V& v = c.*section.*member;
    if constexpr (std::is_same_v<V, std::string>) {
      v = std::string(s);
    } else if constexpr (std::is_same_v<V, bool>) {
      v = ParseBool(key, s);
    } else if constexpr (std::is_floating_point_v<V>) {
      v = ParseNumber<V>(key, s, "a number");
    } else {
      v = ParseNumber<V>(key, s, "an integer");
    }
  };
  return f;
}

const std::map<std::string, Field, std::less<>>& Fields() {
  using C = ExperimentConfig;
  static const auto* fields = [] {
    auto* m = new std::map<std::string, Field, std::less<>>;
    auto& f = *m;
    f["seed"] = {
        [](const C& c) { return std::to_string(c.seed); },
        [](C& c, std::string_view k, std::string_view v) {
          c.seed = ParseNumber<std::uint64_t>(k, v, "an integer");
        }};
    f["output.dir"] = {
        [](const C& c) { return c.output_dir; },
        [](C& c, std::string_view, std::string_view v) { c.output_dir = v; }};

    f["corpus.path"] = Bind(&C::corpus, &C::Corpus::path);
    f["corpus.stopwords"] = Bind(&C::corpus, &C::Corpus::stopwords);
    f["corpus.vocab_size"] = Bind(&C::corpus, &C::Corpus::vocab_size);
    f["corpus.ratio.train"] = {
        [](const C& c) { return FormatDouble(c.corpus.ratios.train); },
        [](C& c, std::string_view k, std::string_view v) {
          c.corpus.ratios.train = ParseNumber<double>(k, v, "a number");
        }};
    f["corpus.ratio.dev"] = {
        [](const C& c) { return FormatDouble(c.corpus.ratios.dev); },
        [](C& c, std::string_view k, std::string_view v) {
          c.corpus.ratios.dev = ParseNumber<double>(k, v, "a number");
        }};
    f["corpus.ratio.test"] = {
        [](const C& c) { return FormatDouble(c.corpus.ratios.test); },
        [](C& c, std::string_view k, std::string_view v) {
          c.corpus.ratios.test = ParseNumber<double>(k, v, "a number");
        }};

    f["victim.kind"] = Bind(&C::victim, &C::Victim::kind);
    f["victim.dim"] = Bind(&C::victim, &C::Victim::dim);
    f["victim.seed"] = Bind(&C::victim, &C::Victim::seed);
    f["victim.url"] = Bind(&C::victim, &C::Victim::url);
    f["victim.timeout_ms"] = Bind(&C::victim, &C::Victim::timeout_ms);
    f["victim.retries"] = Bind(&C::victim, &C::Victim::retries);

    f["attacker.type"] = Bind(&C::attacker, &C::Attacker::type);
    f["attacker.layers"] = Bind(&C::attacker, &C::Attacker::layers);
    f["attacker.heads"] = Bind(&C::attacker, &C::Attacker::heads);
    f["attacker.width"] = Bind(&C::attacker, &C::Attacker::width);
    f["attacker.hidden"] = Bind(&C::attacker, &C::Attacker::hidden);
    f["attacker.steps"] = Bind(&C::attacker, &C::Attacker::steps);
    f["attacker.lr"] = Bind(&C::attacker, &C::Attacker::lr);
    f["attacker.batch"] = Bind(&C::attacker, &C::Attacker::batch);
    f["attacker.epochs"] = Bind(&C::attacker, &C::Attacker::epochs);
    f["attacker.clip"] = Bind(&C::attacker, &C::Attacker::clip);

    f["decode.method"] = Bind(&C::decode, &C::Decode::method);
    f["decode.beam_size"] = Bind(&C::decode, &C::Decode::beam_size);
    f["decode.top_p"] = Bind(&C::decode, &C::Decode::top_p);
    f["decode.temperature"] = Bind(&C::decode, &C::Decode::temperature);
    f["decode.max_len"] = Bind(&C::decode, &C::Decode::max_len);
    f["decode.seed"] = Bind(&C::decode, &C::Decode::seed);

    f["metrics.prf_mode"] = Bind(&C::metrics, &C::Metrics::prf_mode);
    f["metrics.rouge_f"] = Bind(&C::metrics, &C::Metrics::rouge_f);
    f["metrics.es_victim_kind"] = Bind(&C::metrics, &C::Metrics::es_victim_kind);
    f["metrics.es_victim_seed"] = Bind(&C::metrics, &C::Metrics::es_victim_seed);
    f["metrics.perplexity"] = Bind(&C::metrics, &C::Metrics::perplexity);
    f["metrics.lm_layers"] = Bind(&C::metrics, &C::Metrics::lm_layers);
    f["metrics.lm_width"] = Bind(&C::metrics, &C::Metrics::lm_width);
    f["metrics.lm_epochs"] = Bind(&C::metrics, &C::Metrics::lm_epochs);
    f["metrics.sweep_interval"] = Bind(&C::metrics, &C::Metrics::sweep_interval);
    f["metrics.eval_split"] = Bind(&C::metrics, &C::Metrics::eval_split);
    return m;
  }();
  return *fields;
}

}  // namespace

std::map<std::string, std::string> ToKeyValues(const ExperimentConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& [key, field] : Fields()) out[key] = field.get(config);
  return out;
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& [key, field] : Fields()) keys.push_back(key);
  return keys;
}

void SetConfigValue(ExperimentConfig& config, std::string_view key,
                    std::string_view value) {
  auto it = Fields().find(key);
  if (it == Fields().end()) {
    throw InvalidArgument("unknown config key '" + std::string(key) + "'");
  }
  it->second.set(config, key, value);
}

void ApplyOverride(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw InvalidArgument("override '" + std::string(assignment) +
                          "' is not key=value");
  }
  SetConfigValue(config, Trim(assignment.substr(0, eq)),
                 Trim(assignment.substr(eq + 1)));
}

ExperimentConfig ParseConfig(std::string_view text, const std::string& source) {
  ExperimentConfig config;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    try {
      ApplyOverride(config, line);
    } catch (const InvalidArgument& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return config;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), path.string());
}

void ValidateConfig(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument("invalid config: " + what);
  };
  require(!c.corpus.path.empty(), "corpus.path is required");
  require(!c.corpus.stopwords.empty(), "corpus.stopwords is required");
  const auto& r = c.corpus.ratios;
  require(r.train >= 0 && r.dev >= 0 && r.test >= 0, "split ratios must be >= 0");
  require(std::abs(r.train + r.dev + r.test - 1.0) <= 1e-9,
          "split ratios must sum to 1");
  require(c.corpus.vocab_size >= 4, "corpus.vocab_size must be >= 4");
  require(c.victim.kind == "bag-of-embeddings" ||
              c.victim.kind == "tiny-transformer" || c.victim.kind == "remote",
          "victim.kind must be bag-of-embeddings, tiny-transformer or remote");
  require(c.victim.dim >= 2, "victim.dim must be >= 2");
  require(c.victim.kind != "remote" || !c.victim.url.empty(),
          "victim.url is required for a remote victim");
  require(c.attacker.type == "geia" || c.attacker.type == "mlc" ||
              c.attacker.type == "msp",
          "attacker.type must be geia, mlc or msp");
  require(c.attacker.layers >= 1 && c.attacker.heads >= 1 && c.attacker.width >= 1,
          "attacker dimensions must be positive");
  require(c.attacker.width % c.attacker.heads == 0,
          "attacker.width must be divisible by attacker.heads");
  require(c.attacker.hidden >= 1 && c.attacker.steps >= 1,
          "attacker.hidden and attacker.steps must be >= 1");
  require(c.attacker.lr >= 0, "attacker.lr must be >= 0");
  require(c.attacker.batch >= 1, "attacker.batch must be >= 1");
  require(c.attacker.epochs >= 0, "attacker.epochs must be >= 0");
  require(c.decode.method == "beam" || c.decode.method == "nucleus",
          "decode.method must be beam or nucleus");
  require(c.decode.beam_size >= 1, "decode.beam_size must be >= 1");
  require(c.decode.top_p > 0 && c.decode.top_p <= 1, "decode.top_p must lie in (0, 1]");
  require(c.decode.temperature > 0, "decode.temperature must be > 0");
  require(c.decode.max_len >= 1, "decode.max_len must be >= 1");
  require(c.metrics.prf_mode == "set" || c.metrics.prf_mode == "multiset",
          "metrics.prf_mode must be set or multiset");
  require(c.metrics.es_victim_kind == "bag-of-embeddings" ||
              c.metrics.es_victim_kind == "tiny-transformer",
          "metrics.es_victim_kind must name a toy victim");
  require(c.metrics.lm_layers >= 1 && c.metrics.lm_width >= 4 &&
              c.metrics.lm_width % 4 == 0 && c.metrics.lm_epochs >= 0,
          "fluency LM dimensions must be positive, width a multiple of 4");
  require(c.metrics.sweep_interval > 0 && c.metrics.sweep_interval <= 1,
          "metrics.sweep_interval must lie in (0, 1]");
  require(c.metrics.eval_split == "test" || c.metrics.eval_split == "train",
          "metrics.eval_split must be test or train");
  require(!c.output_dir.empty(), "output.dir is required");
}

std::string SerializeConfig(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [key, value] : ToKeyValues(config)) {
    out += key + " = " + value + "\n";
  }
  return out;
}

std::string ConfigHash(const ExperimentConfig& config) {
  Fnv1a h;
  for (const auto& [key, value] : ToKeyValues(config)) {
    if (key == "output.dir") continue;
    h.Update(key).Update("=").Update(value).Update("\n");
  }
  return h.HexDigest();
}

}  // namespace invlab::harness
