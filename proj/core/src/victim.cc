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

#include "invlab/victim.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "invlab/error.h"
#include "invlab/hash.h"
#include "invlab/nn/layers.h"
#include "invlab/rng.h"
#include "json.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro.
#include "httplib.h"

namespace invlab {

std::vector<SentenceEmbedding> VictimModel::EmbedBatch(
    std::span<const AnnotatedSentence> sentences) const {
  std::vector<SentenceEmbedding> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(Embed(s));
  return out;
}

ToyVictimKind ParseToyVictimKind(std::string_view name) {
  if (name == "bag-of-embeddings") return ToyVictimKind::kBagOfEmbeddings;
  if (name == "tiny-transformer") return ToyVictimKind::kTinyTransformer;
  throw InvalidArgument("unknown victim kind '" + std::string(name) + "'");
}

std::string_view ToString(ToyVictimKind kind) {
  switch (kind) {
    case ToyVictimKind::kBagOfEmbeddings:
      return "bag-of-embeddings";
    case ToyVictimKind::kTinyTransformer:
      return "tiny-transformer";
  }
  return "?";
}

namespace {

using nn::Matrix;

constexpr double kInitRange = 0.1;
constexpr int kMaxPositions = 256;

std::string ToyId(ToyVictimKind kind, int dim, std::uint64_t seed,
                  const Vocabulary& vocab) {
  return std::string(ToString(kind)) + "-d" + std::to_string(dim) + "-s" +
         std::to_string(seed) + "-v" + vocab.Hash().substr(0, 8);
}

void CheckTokens(const AnnotatedSentence& s, std::size_t vocab_size) {
  for (TokenId id : s.token_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
      throw InvalidArgument("token id outside the victim vocabulary");
    }
  }
}

class BagOfEmbeddingsVictim : public VictimModel {
 public:
  BagOfEmbeddingsVictim(int dim, std::uint64_t seed, const Vocabulary& vocab)
      : id_(ToyId(ToyVictimKind::kBagOfEmbeddings, dim, seed, vocab)),
        dim_(dim),
        table_(vocab.size(), dim) {
    Rng rng(seed);
    for (Eigen::Index i = 0; i < table_.size(); ++i) {
      table_.data()[i] = rng.Uniform(-kInitRange, kInitRange);
    }
  }

  const std::string& id() const override { return id_; }
  int dim() const override { return dim_; }

  SentenceEmbedding Embed(const AnnotatedSentence& s) const override {
    CheckTokens(s, static_cast<std::size_t>(table_.rows()));
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(dim_);
    for (TokenId id : s.token_ids) sum += table_.row(id);
    if (!s.token_ids.empty()) sum /= static_cast<double>(s.token_ids.size());
    SentenceEmbedding e;
    e.victim_id = id_;
    e.values.resize(dim_);
    for (int i = 0; i < dim_; ++i) e.values[i] = static_cast<float>(sum(i));
    return e;
  }

 private:
  std::string id_;
  int dim_;
  Matrix<double> table_;
};

class TinyTransformerVictim : public VictimModel {
 public:
  static constexpr int kBlocks = 2;

  TinyTransformerVictim(int dim, std::uint64_t seed, const Vocabulary& vocab)
      : id_(ToyId(ToyVictimKind::kTinyTransformer, dim, seed, vocab)),
        dim_(dim),
        tokens_("victim.tokens", static_cast<Eigen::Index>(vocab.size()), dim),
        positions_("victim.positions", kMaxPositions, dim) {
    const int heads = dim % 4 == 0 ? 4 : (dim % 2 == 0 ? 2 : 1);
    for (int b = 0; b < kBlocks; ++b) {
      blocks_.emplace_back("victim.block" + std::to_string(b), dim, heads,
                           /*causal=*/false);
    }
    Rng rng(seed);
    nn::InitUniform(tokens_, rng, -kInitRange, kInitRange);
    nn::InitUniform(positions_, rng, -kInitRange, kInitRange);
    for (auto& block : blocks_) {
      nn::ParameterRefs<double> params;
      block.Collect(params);
      for (auto* p : params) {
        // Layer norms keep their identity affine map.
        if (p->name.find(".ln") != std::string::npos) continue;
        nn::InitUniform(*p, rng, -kInitRange, kInitRange);
      }
    }
  }

  const std::string& id() const override { return id_; }
  int dim() const override { return dim_; }

  SentenceEmbedding Embed(const AnnotatedSentence& s) const override {
    CheckTokens(s, static_cast<std::size_t>(tokens_.value.rows()));
    SentenceEmbedding e;
    e.victim_id = id_;
    e.values.assign(dim_, 0.0f);
    const int len = static_cast<int>(s.token_ids.size());
    if (len == 0) return e;
    if (len > kMaxPositions) {
      throw InvalidArgument("sentence longer than the victim context");
    }
    Matrix<double> x(len, dim_);
    for (int t = 0; t < len; ++t) {
      x.row(t) = tokens_.value.row(s.token_ids[t]) + positions_.value.row(t);
    }
    nn::SequenceLayout layout{1, len, {len}};
    for (const auto& block : blocks_) x = block.Forward(x, layout, nullptr);
    Eigen::RowVectorXd pooled = x.colwise().mean();
    for (int i = 0; i < dim_; ++i) e.values[i] = static_cast<float>(pooled(i));
    return e;
  }

 private:
  std::string id_;
  int dim_;
  nn::Parameter<double> tokens_;
  nn::Parameter<double> positions_;
  std::vector<nn::TransformerBlock<double>> blocks_;
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl ParseUrl(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw InvalidArgument("remote victim URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class RemoteVictim : public VictimModel {
 public:
  explicit RemoteVictim(RemoteVictimOptions options)
      : options_(std::move(options)), url_(ParseUrl(options_.url)) {
    if (options_.dim < 1) throw InvalidArgument("remote victim dim must be >= 1");
    if (options_.batch_size == 0) options_.batch_size = 1;
    id_ = "remote-" + Fnv1a().Update(options_.url).HexDigest().substr(0, 12) +
          "-d" + std::to_string(options_.dim);
  }

  const std::string& id() const override { return id_; }
  int dim() const override { return options_.dim; }

  SentenceEmbedding Embed(const AnnotatedSentence& s) const override {
    return EmbedBatch(std::span<const AnnotatedSentence>(&s, 1)).front();
  }

  std::vector<SentenceEmbedding> EmbedBatch(
      std::span<const AnnotatedSentence> sentences) const override {
    std::vector<SentenceEmbedding> out;
    out.reserve(sentences.size());
    for (std::size_t lo = 0; lo < sentences.size(); lo += options_.batch_size) {
      const std::size_t hi = std::min(sentences.size(), lo + options_.batch_size);
      auto chunk = Request(sentences.subspan(lo, hi - lo));
      for (auto& e : chunk) out.push_back(std::move(e));
    }
    return out;
  }

 private:
  std::vector<SentenceEmbedding> Request(
      std::span<const AnnotatedSentence> sentences) const {
    nlohmann::json body;
    body["texts"] = nlohmann::json::array();
    for (const auto& s : sentences) body["texts"].push_back(s.text);
    const std::string payload = body.dump();

    httplib::Client client(url_.origin);
    const auto seconds = options_.timeout_ms / 1000;
    const auto micros = (options_.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
      auto res = client.Post(url_.path, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw ProtocolError("embedding provider answered HTTP " +
                            std::to_string(res->status));
      }
      return ParseReply(res->body, sentences.size());
    }
    throw Error("embedding provider unreachable after " +
                std::to_string(options_.retries + 1) +
                " attempts: " + last_error);
  }

  std::vector<SentenceEmbedding> ParseReply(const std::string& body,
                                            std::size_t expected) const {
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ProtocolError(std::string("malformed provider reply: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("embeddings") ||
        !reply["embeddings"].is_array()) {
      throw ProtocolError("provider reply lacks an 'embeddings' list");
    }
    const auto& rows = reply["embeddings"];
    if (rows.size() != expected) {
      throw ProtocolError("provider returned " + std::to_string(rows.size()) +
                          " embeddings for " + std::to_string(expected) +
                          " texts");
    }
    std::vector<SentenceEmbedding> out;
    out.reserve(expected);
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != static_cast<std::size_t>(options_.dim)) {
        throw ProtocolError("provider embedding has dimension " +
                            std::to_string(row.is_array() ? row.size() : 0) +
                            ", expected " + std::to_string(options_.dim));
      }
      SentenceEmbedding e;
      e.victim_id = id_;
      e.values.reserve(row.size());
      for (const auto& v : row) {
        if (!v.is_number()) throw ProtocolError("non-numeric embedding entry");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ProtocolError("non-finite embedding entry");
        e.values.push_back(static_cast<float>(d));
      }
      out.push_back(std::move(e));
    }
    return out;
  }

  RemoteVictimOptions options_;
  ParsedUrl url_;
  std::string id_;
};

/* Cache file helpers */

std::map<std::string, std::string> ReadKeyValues(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot read " + p.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void WriteAtomically(const std::filesystem::path& path,
                     const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void AppendFloatLE(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

float ReadFloatLE(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

std::filesystem::path ManifestPath(const std::filesystem::path& cache_path) {
  auto p = cache_path;
  p += ".manifest";
  return p;
}

}  // namespace

std::unique_ptr<VictimModel> MakeToyVictim(ToyVictimKind kind, int dim,
                                           std::uint64_t seed,
                                           const Vocabulary& vocab) {
  if (dim < 2) throw InvalidArgument("victim dimension must be >= 2");
  switch (kind) {
    case ToyVictimKind::kBagOfEmbeddings:
      return std::make_unique<BagOfEmbeddingsVictim>(dim, seed, vocab);
    case ToyVictimKind::kTinyTransformer:
      return std::make_unique<TinyTransformerVictim>(dim, seed, vocab);
  }
  throw InvalidArgument("unknown victim kind");
}

std::unique_ptr<VictimModel> MakeRemoteVictim(RemoteVictimOptions options) {
  return std::make_unique<RemoteVictim>(std::move(options));
}

SentenceEmbedding CountingVictim::Embed(const AnnotatedSentence& s) const {
  queries_.fetch_add(1);
  return inner_.Embed(s);
}

std::vector<SentenceEmbedding> CountingVictim::EmbedBatch(
    std::span<const AnnotatedSentence> sentences) const {
  queries_.fetch_add(sentences.size());
  return inner_.EmbedBatch(sentences);
}

std::vector<SentenceEmbedding> EmbedCorpusCached(
    const VictimModel& victim, std::span<const AnnotatedSentence> corpus,
    const std::filesystem::path& cache_path) {
  const std::string corpus_hash = CorpusHash(corpus);
  const auto manifest_path = ManifestPath(cache_path);
  const std::size_t dim = static_cast<std::size_t>(victim.dim());

  if (std::filesystem::exists(manifest_path)) {
    auto kv = ReadKeyValues(manifest_path);
    if (kv["victim_id"] != victim.id() || kv["corpus_hash"] != corpus_hash ||
        kv["dim"] != std::to_string(dim) ||
        kv["count"] != std::to_string(corpus.size())) {
      throw StaleCacheError(
          "embedding cache " + cache_path.string() + " was built for victim '" +
          kv["victim_id"] + "' and corpus " + kv["corpus_hash"] +
          "; delete it (and its .manifest) to regenerate");
    }
    std::ifstream in(cache_path, std::ios::binary);
    if (!in) throw StaleCacheError("embedding cache data missing: " + cache_path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    if (bytes.size() != corpus.size() * dim * 4) {
      throw StaleCacheError("embedding cache " + cache_path.string() +
                            " has the wrong size; delete it to regenerate");
    }
    std::vector<SentenceEmbedding> out(corpus.size());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    for (auto& e : out) {
      e.victim_id = victim.id();
      e.values.resize(dim);
      for (auto& v : e.values) {
        v = ReadFloatLE(p);
        p += 4;
      }
    }
    return out;
  }

  auto embeddings = victim.EmbedBatch(corpus);
  std::string bytes;
  bytes.reserve(corpus.size() * dim * 4);
  for (const auto& e : embeddings) {
    if (e.values.size() != dim) {
      throw ProtocolError("victim returned an embedding of dimension " +
                          std::to_string(e.values.size()));
    }
    for (float v : e.values) {
      if (!std::isfinite(v)) throw ProtocolError("victim returned a non-finite value");
      AppendFloatLE(bytes, v);
    }
  }
  if (cache_path.has_parent_path()) {
    std::filesystem::create_directories(cache_path.parent_path());
  }
  WriteAtomically(cache_path, bytes);
  std::ostringstream manifest;
  manifest << "victim_id=" << victim.id() << "\n"
           << "dim=" << dim << "\n"
           << "corpus_hash=" << corpus_hash << "\n"
           << "count=" << corpus.size() << "\n";
  WriteAtomically(manifest_path, manifest.str());
  return embeddings;
}

}  // namespace invlab
