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

#include "invlab/harness/experiment.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "invlab/checkpoint.h"
#include "invlab/error.h"
#include "invlab/hash.h"
#include "invlab/harness/plot.h"
#include "invlab/harness/report.h"
#include "json.hpp"

namespace invlab::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kMinPositions = 64;

void WriteFile(const fs::path& path, const std::string& body) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << body;
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

bool IsContent(TokenId t) {
  return t >= static_cast<TokenId>(Vocabulary::kNumSpecials);
}

std::vector<TokenId> ContentOnly(std::span<const TokenId> tokens) {
  std::vector<TokenId> out;
  for (TokenId t : tokens) {
    if (IsContent(t)) out.push_back(t);
  }
  return out;
}

std::string JoinWords(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

double Ratio(std::span<const std::vector<std::string>> lists,
             const StopwordLexicon& lexicon) {
  std::size_t total = 0;
  for (const auto& l : lists) total += l.size();
  return total == 0 ? 0.0 : StopwordRatio(lists, lexicon);
}

std::unique_ptr<VictimModel> MakeVictim(const ExperimentConfig& c,
                                        const Vocabulary& vocab) {
  if (c.victim.kind == "remote") {
    RemoteVictimOptions o;
    o.url = c.victim.url;
    o.dim = c.victim.dim;
    o.timeout_ms = c.victim.timeout_ms;
    o.retries = c.victim.retries;
    return MakeRemoteVictim(o);
  }
  return MakeToyVictim(ParseToyVictimKind(c.victim.kind), c.victim.dim,
                       c.victim.seed, vocab);
}

nn::TrainOptions TrainOptionsFor(const ExperimentConfig& c) {
  nn::TrainOptions t;
  t.adam.learning_rate = c.attacker.lr;
  t.adam.clip_norm = c.attacker.clip;
  t.batch_size = c.attacker.batch;
  t.epochs = c.attacker.epochs;
  t.seed = c.seed;
  return t;
}

std::string DecodeLabel(const ExperimentConfig& c) {
  if (c.attacker.type == "mlc") return "threshold";
  if (c.attacker.type == "msp") return "greedy-t" + std::to_string(c.attacker.steps);
  if (c.decode.method == "beam") return "beam" + std::to_string(c.decode.beam_size);
  std::ostringstream s;
  s << "nucleus-p" << c.decode.top_p << "-t" << c.decode.temperature << "-s"
    << c.decode.seed;
  return s.str();
}

}  // namespace

fs::path DefaultCacheRoot() {
  if (const char* env = std::getenv(kCacheEnvVar); env && *env) return env;
  return ".invlab-cache";
}

std::vector<InversionResult> LoadInversions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<InversionResult> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      InversionResult r;
      r.index = j.at("index").get<std::size_t>();
      r.kind = j.at("kind").get<std::string>();
      r.reference = j.at("reference").get<std::string>();
      r.decoded = j.at("decoded").get<std::string>();
      r.tokens = j.at("tokens").get<std::vector<TokenId>>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return out;
}

Experiment::Experiment(ExperimentConfig config, ExperimentOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  ValidateConfig(config_);
  config_hash_ = ConfigHash(config_);
  cache_root_ = options_.cache_root.empty() ? DefaultCacheRoot() : options_.cache_root;
}

Experiment::~Experiment() = default;

template <typename F>
auto Experiment::Stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void Experiment::Log(const std::string& line) const {
  if (options_.log) *options_.log << line << '\n' << std::flush;
}

void Experiment::Prepare() {
  Stage("prepare", [&] { PrepareImpl(); });
}
void Experiment::Embed() {
  Stage("embed", [&] { EmbedImpl(); });
}
void Experiment::Train() {
  Stage("train", [&] { TrainImpl(); });
}
std::vector<InversionResult> Experiment::Invert() {
  return Stage("invert", [&] { return InvertImpl(); });
}
MetricsReport Experiment::Evaluate() {
  return Stage("evaluate", [&] { return EvaluateImpl(); });
}
SweepResult Experiment::Sweep() {
  return Stage("sweep", [&] { return SweepImpl(); });
}

MetricsReport Experiment::Run() {
  Prepare();
  Embed();
  Train();
  Invert();
  return Evaluate();
}

std::size_t Experiment::victim_queries() const {
  return counting_ ? counting_->queries() : 0;
}

const Vocabulary& Experiment::vocab() const {
  if (!vocab_) throw Error("experiment not prepared");
  return *vocab_;
}

const CorpusSplit& Experiment::split() const {
  if (!prepared_) throw Error("experiment not prepared");
  return split_;
}

const VictimModel& Experiment::victim() const {
  if (!victim_) throw Error("experiment has no victim yet");
  return *victim_;
}

void Experiment::PrepareImpl() {
  if (prepared_) return;
  stopwords_ = StopwordLexicon::Load(config_.corpus.stopwords);
  corpus_ = LoadCorpus(config_.corpus.path, stopwords_);
  corpus_hash_ = CorpusHash(corpus_);
  vocab_ = std::make_unique<Vocabulary>(
      Vocabulary::Build(corpus_, config_.corpus.vocab_size));
  EncodeCorpus(*vocab_, corpus_);
  split_ = SplitCorpus(corpus_, config_.corpus.ratios, config_.seed);

  fs::create_directories(config_.output_dir);
  WriteFile(output_dir() / "config.txt", SerializeConfig(config_));
  WriteFile(output_dir() / "config.hash", config_hash_ + "\n");
  prepared_ = true;
  Log("prepare: " + std::to_string(corpus_.size()) + " sentences, |V| = " +
      std::to_string(vocab_->size()) + ", split " +
      std::to_string(split_.train.size()) + "/" + std::to_string(split_.dev.size()) +
      "/" + std::to_string(split_.test.size()));
}

void Experiment::EmbedImpl() {
  if (!embeddings_.empty()) return;
  Prepare();
  if (!victim_) {
    victim_ = options_.victim ? options_.victim
                              : std::shared_ptr<const VictimModel>(
                                    MakeVictim(config_, *vocab_));
    counting_ = std::make_unique<CountingVictim>(*victim_);
  }
  const fs::path cache = cache_root_ / "embeddings" /
                         (victim_->id() + "-" + corpus_hash_ + ".f32");
  fs::create_directories(cache.parent_path());
  embeddings_ = EmbedCorpusCached(*counting_, corpus_, cache);
  Log("embed: " + victim_->id() + ", " + std::to_string(counting_->queries()) +
      " victim queries");
}

std::vector<SentenceEmbedding> Experiment::Select(
    const std::vector<std::size_t>& idx) const {
  std::vector<SentenceEmbedding> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(embeddings_[i]);
  return out;
}

void Experiment::BuildAttacker() {
  const int v = static_cast<int>(vocab_->size());
  const int d = victim_->dim();
  geia_.reset();
  mlc_.reset();
  msp_.reset();
  if (config_.attacker.type == "geia") {
    std::size_t longest = 0;
    for (const auto& s : corpus_) longest = std::max(longest, s.token_ids.size());
    GeiaConfig g;
    g.vocab_size = v;
    g.embed_dim = d;
    g.width = config_.attacker.width;
    g.layers = config_.attacker.layers;
    g.heads = config_.attacker.heads;
    g.max_positions = std::max<int>(
        {kMinPositions, static_cast<int>(longest) + 1, config_.decode.max_len + 1});
    g.init_seed = config_.seed;
    geia_ = std::make_unique<GeiaAttacker<float>>(g);
  } else if (config_.attacker.type == "mlc") {
    mlc_ = std::make_unique<MlcAttacker<float>>(MlcConfig{v, d, config_.seed});
  } else {
    MspConfig m;
    m.vocab_size = v;
    m.embed_dim = d;
    m.hidden = config_.attacker.hidden;
    m.steps = config_.attacker.steps;
    m.init_seed = config_.seed;
    msp_ = std::make_unique<MspAttacker<float>>(m);
  }
}

bool Experiment::TryLoadCheckpoint() {
  if (!CheckpointExists(output_dir())) return false;
  const auto manifest = LoadCheckpointManifest(output_dir());
  if (!manifest.Has("config_hash") || manifest.Get("config_hash") != config_hash_ ||
      !manifest.Has("corpus_hash") || manifest.Get("corpus_hash") != corpus_hash_) {
    Log("train: existing checkpoint belongs to another config or corpus; retraining");
    return false;
  }
  manifest.Verify(vocab_->Hash(), victim_->id());
  BuildAttacker();
  if (geia_) LoadCheckpointTensors(output_dir(), geia_->Tensors());
  if (msp_) LoadCheckpointTensors(output_dir(), msp_->Tensors());
  if (mlc_) {
    LoadCheckpointTensors(output_dir(), mlc_->Tensors());
    mlc_->set_threshold(std::stod(manifest.Get("threshold")));
  }
  Log("train: reusing checkpoint (epoch " + manifest.Get("epoch") + ")");
  return true;
}

void Experiment::TrainImpl() {
  if (attacker_ready_) return;
  Embed();
  if (TryLoadCheckpoint()) {
    attacker_ready_ = true;
    trained_ = false;
    return;
  }
  BuildAttacker();
  const auto train_e = Select(split_.train_index);
  const auto dev_e = Select(split_.dev_index);
  const auto options = TrainOptionsFor(config_);

  std::string log_lines;
  auto on_epoch = [&](const nn::EpochRecord& r) {
    json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss;
    j["dev_loss"] = r.dev_loss;
    j["wall_seconds"] = r.wall_seconds;
    log_lines += j.dump() + "\n";
    char buf[128];
    std::snprintf(buf, sizeof(buf), "train: epoch %d train %.4f dev %.4f (%.1fs)",
                  r.epoch, r.train_loss, r.dev_loss, r.wall_seconds);
    Log(buf);
  };

  nn::FitResult fit;
  nn::ParameterRefs<float> tensors;
  if (geia_) {
    fit = TrainGeia(*geia_, train_e, split_.train, dev_e, split_.dev, options, on_epoch);
    tensors = geia_->Tensors();
  } else if (mlc_) {
    fit = TrainMlc(*mlc_, train_e, split_.train, dev_e, split_.dev, options, on_epoch);
    // The threshold is chosen on dev (train when there is no dev split).
    const bool has_dev = !split_.dev.empty();
    const auto sweep = SweepThresholds(*mlc_, has_dev ? dev_e : train_e,
                                       has_dev ? std::span(split_.dev)
                                               : std::span(split_.train),
                                       config_.metrics.sweep_interval);
    mlc_->set_threshold(sweep.best_threshold);
    tensors = mlc_->Tensors();
  } else {
    fit = TrainMsp(*msp_, train_e, split_.train, dev_e, split_.dev, options, on_epoch);
    tensors = msp_->Tensors();
  }
  WriteFile(output_dir() / "train_log.jsonl", log_lines);

  CheckpointManifest m;
  m.Set("attacker", config_.attacker.type);
  m.Set("config_hash", config_hash_);
  m.Set("corpus_hash", corpus_hash_);
  m.Set("vocab_hash", vocab_->Hash());
  m.Set("vocab_size", vocab_->size());
  m.Set("victim_id", victim_->id());
  m.Set("embed_dim", victim_->dim());
  m.Set("epoch", fit.best_epoch);
  m.Set("dev_loss", fit.best_loss);
  if (geia_) {
    m.Set("layers", geia_->config().layers);
    m.Set("heads", geia_->config().heads);
    m.Set("width", geia_->config().width);
    m.Set("max_positions", geia_->config().max_positions);
  }
  if (msp_) {
    m.Set("hidden", msp_->config().hidden);
    m.Set("steps", msp_->config().steps);
  }
  if (mlc_) m.Set("threshold", mlc_->threshold());
  SaveCheckpoint(output_dir(), m, tensors);
  attacker_ready_ = true;
  trained_ = true;
}

const std::vector<AnnotatedSentence>& Experiment::EvalSentences() const {
  return config_.metrics.eval_split == "train" ? split_.train : split_.test;
}

const std::vector<std::size_t>& Experiment::EvalIndex() const {
  return config_.metrics.eval_split == "train" ? split_.train_index
                                               : split_.test_index;
}

std::vector<InversionResult> Experiment::InvertImpl() {
  Train();
  const auto& test = EvalSentences();
  const auto test_e = Select(EvalIndex());
  std::vector<InversionResult> results(test.size());

  auto invert_one = [&](std::size_t i) {
    InversionResult& r = results[i];
    r.index = EvalIndex()[i];
    r.reference = test[i].text;
    const auto& e = test_e[i].values;
    if (geia_) {
      r.kind = "sequence";
      if (config_.decode.method == "beam") {
        r.tokens = DecodeBeam(*geia_, e, config_.decode.beam_size,
                              config_.decode.max_len).tokens;
      } else {
        NucleusOptions o;
        o.top_p = config_.decode.top_p;
        o.temperature = config_.decode.temperature;
        o.seed = config_.decode.seed * 0x9e3779b97f4a7c15ULL + r.index;
        r.tokens = DecodeNucleus(*geia_, e, o, config_.decode.max_len).tokens;
      }
    } else if (mlc_) {
      r.kind = "set";
      r.tokens = PredictMlc(*mlc_, e, mlc_->threshold());
    } else {
      r.kind = "set";
      r.tokens = PredictMsp(*msp_, e);
    }
    r.decoded = vocab_->Detokenize(r.tokens);
  };

  // Every attacker is read-only here; each worker owns disjoint slots.
  int workers = options_.threads > 0
                    ? options_.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::max(1, std::min<int>(workers, static_cast<int>(test.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < test.size(); i = next++) invert_one(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::string dump;
  for (const auto& r : results) {
    json j;
    j["index"] = r.index;
    j["kind"] = r.kind;
    j["reference"] = r.reference;
    j["decoded"] = r.decoded;
    j["tokens"] = r.tokens;
    dump += j.dump() + "\n";
  }
  WriteFile(output_dir() / "inversions.jsonl", dump);
  inversions_ = results;
  Log("invert: " + std::to_string(results.size()) + " " +
      config_.metrics.eval_split + " sentences");
  return results;
}

SweepResult Experiment::SweepImpl() {
  if (config_.attacker.type != "mlc") {
    throw InvalidArgument("threshold sweeps apply to the mlc attacker only");
  }
  Train();
  const auto sweep = SweepThresholds(*mlc_, Select(split_.test_index), split_.test,
                                     config_.metrics.sweep_interval);
  WriteFile(output_dir() / "sweep.csv", SweepCsv(victim_->id(), sweep));
  return sweep;
}

std::optional<double> Experiment::FluencyPerplexity(
    const std::vector<std::vector<TokenId>>& outputs) {
  const auto& mc = config_.metrics;
  Fnv1a h;
  h.Update(corpus_hash_).Update(vocab_->Hash());
  h.Update(std::to_string(mc.lm_layers) + "/" + std::to_string(mc.lm_width) + "/" +
           std::to_string(mc.lm_epochs) + "/" + std::to_string(config_.seed));
  for (auto v : {config_.corpus.ratios.train, config_.corpus.ratios.dev,
                 config_.corpus.ratios.test}) {
    h.Update(std::to_string(v));
  }
  const fs::path dir = cache_root_ / "fluency-lm" / h.HexDigest();

  std::size_t longest = 0;
  for (const auto& s : corpus_) longest = std::max(longest, s.token_ids.size());
  for (const auto& o : outputs) longest = std::max(longest, o.size());
  GeiaConfig g;
  g.vocab_size = static_cast<int>(vocab_->size());
  g.embed_dim = 1;
  g.width = mc.lm_width;
  g.layers = mc.lm_layers;
  g.heads = 4;
  g.max_positions = std::max<int>(kMinPositions, static_cast<int>(longest) + 1);
  g.init_seed = config_.seed + 1;

  // The positional table depends on the longest sequence scored, so the
  // cached model is keyed on it too.
  const fs::path model_dir = dir / std::to_string(g.max_positions);
  GeiaAttacker<float> lm(g);
  if (CheckpointExists(model_dir)) {
    LoadCheckpointTensors(model_dir, lm.Tensors());
  } else {
    auto zeros = [](std::size_t n) {
      std::vector<SentenceEmbedding> out(n);
      for (auto& e : out) e.values.assign(1, 0.0f);
      return out;
    };
    nn::TrainOptions t;
    t.adam.learning_rate = 1e-3;
    t.batch_size = 32;
    t.epochs = mc.lm_epochs;
    t.seed = config_.seed + 1;
    Log("evaluate: training fluency LM");
    TrainGeia(lm, zeros(split_.train.size()), split_.train, zeros(split_.dev.size()),
              split_.dev, t);
    CheckpointManifest m;
    m.Set("attacker", "fluency-lm");
    m.Set("vocab_hash", vocab_->Hash());
    m.Set("victim_id", "none");
    SaveCheckpoint(model_dir, m, lm.Tensors());
  }
  return Perplexity(lm, outputs);
}

MetricsReport Experiment::EvaluateImpl() {
  const fs::path dump = output_dir() / "inversions.jsonl";
  Train();
  // A dump on disk is only trusted when the checkpoint was reused.
  std::vector<InversionResult> results;
  if (inversions_) {
    results = *inversions_;
  } else if (!trained_ && fs::exists(dump)) {
    results = LoadInversions(dump);
  } else {
    results = Invert();
  }
  const auto& eval = EvalSentences();
  if (results.size() != eval.size()) {
    throw Error("inversion dump does not match the test split; rerun invert");
  }

  MetricsReport rep;
  rep.attacker = config_.attacker.type;
  rep.victim_id = victim_->id();
  rep.corpus_hash = corpus_hash_;
  rep.config_hash = config_hash_;
  rep.decode = DecodeLabel(config_);
  rep.sentences = results.size();
  if (results.empty()) throw Error(config_.metrics.eval_split + " split is empty");

  std::vector<std::vector<TokenId>> pred, ref, raw_pred;
  std::vector<std::string> gen_text, ref_text;
  std::vector<std::vector<std::string>> gen_words, ref_words;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const auto& s = eval[i];
    if (r.index != EvalIndex()[i]) {
      throw Error("inversion dump does not match the test split; rerun invert");
    }
    pred.push_back(ContentOnly(r.tokens));
    ref.push_back(ContentOnly(s.token_ids));
    raw_pred.push_back(r.tokens);
    gen_text.push_back(r.decoded);
    ref_text.push_back(JoinWords(s.words));
    gen_words.push_back(SplitWords(r.decoded));
    ref_words.push_back(s.words);
  }

  const bool is_set = config_.attacker.type != "geia";
  const MatchMode mode =
      is_set || config_.metrics.prf_mode == "set" ? MatchMode::kSet : MatchMode::kMultiset;
  const Prf prf = MicroPrf(pred, ref, mode);
  rep.precision = prf.precision;
  rep.recall = prf.recall;
  rep.f1 = prf.f1;
  rep.nerr = NamedEntityRecovery(gen_text, eval);

  rep.swr_attack = Ratio(gen_words, stopwords_);
  rep.swr_testset = Ratio(ref_words, stopwords_);
  rep.swr_diff = StopwordRatioDiff(rep.swr_attack, rep.swr_testset);

  // Generation metrics need a non-empty reference.
  std::vector<std::vector<TokenId>> cand_g, ref_g;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (ref[i].empty()) continue;
    cand_g.push_back(pred[i]);
    ref_g.push_back(ref[i]);
  }
  if (!ref_g.empty()) {
    rep.rouge1 = CorpusMeanRouge(cand_g, ref_g, RougeVariant::kRouge1,
                                 config_.metrics.rouge_f);
    rep.rougeL = CorpusMeanRouge(cand_g, ref_g, RougeVariant::kRougeL,
                                 config_.metrics.rouge_f);
    rep.bleu1 = CorpusMeanBleu(cand_g, ref_g, 1);
    rep.bleu2 = CorpusMeanBleu(cand_g, ref_g, 2);
    rep.bleu4 = CorpusMeanBleu(cand_g, ref_g, 4);
  }

  // Similarity under an independent encoder.
  {
    const auto kind = ParseToyVictimKind(config_.metrics.es_victim_kind);
    if (config_.victim.kind == config_.metrics.es_victim_kind &&
        config_.victim.seed == config_.metrics.es_victim_seed && !options_.victim) {
      Log("evaluate: warning: similarity encoder equals the attacked victim");
    }
    auto encoder = MakeToyVictim(kind, config_.victim.dim,
                                 config_.metrics.es_victim_seed, *vocab_);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < gen_text.size(); ++i) {
      pairs.emplace_back(gen_text[i], ref_text[i]);
    }
    try {
      rep.embedding_similarity = EmbeddingSimilarity(*encoder, *vocab_, pairs);
    } catch (const InvalidArgument&) {
      rep.embedding_similarity = std::nullopt;
    }
  }

  if (config_.metrics.perplexity) {
    std::vector<std::vector<TokenId>> outputs;
    for (const auto& p : raw_pred) {
      std::vector<TokenId> o;
      for (TokenId t : p) {
        if (t != Vocabulary::kPadId && t != Vocabulary::kEosId) o.push_back(t);
      }
      outputs.push_back(std::move(o));
    }
    rep.perplexity = FluencyPerplexity(outputs);
  }

  rep.emr = ExactMatchRatio(gen_text, ref_text);
  const auto ed = EditDistance(gen_text, ref_text);
  rep.edit_distance_mean = ed.mean;
  rep.edit_distance_median = ed.median;

  if (mlc_) {
    Sweep();
    rep.threshold = mlc_->threshold();
    rep.sweep_csv = "sweep.csv";
  }

  WriteFile(output_dir() / "report.txt", SerializeReport(rep));
  WriteFile(output_dir() / "report.csv",
            ReportCsvHeader() + "\n" + ReportCsvRow(rep) + "\n");
  char buf[160];
  std::snprintf(buf, sizeof(buf), "evaluate: P %.4f R %.4f F1 %.4f EMR %.4f",
                rep.precision, rep.recall, rep.f1, rep.emr);
  Log(buf);
  return rep;
}

}  // namespace invlab::harness
