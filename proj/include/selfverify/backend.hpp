#pragma once

// Completion backends. Everything downstream talks to the Backend interface;
// concrete implementations are the scripted backend (tests, demos,
// simulations), the OpenAI-style HTTP backend, and a caching wrapper that
// records request/response pairs in an append-only JSONL file and can replay
// them without a live backend.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace selfverify {

struct GenerationRequest {
  std::string prompt;
  int n = 1;
  int max_tokens = 168;
  double temperature = 0.7;
  std::vector<std::string> stop;
  // Stream id for the scripted backend: callers derive it from their logical
  // position (problem/candidate/variant) so results are independent of thread
  // interleaving. Not part of the request fingerprint.
  std::optional<uint64_t> seed;
};

struct GenerationResponse {
  std::vector<std::string> completions;
  std::string model_id;
  bool cached = false;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Must be safe to call from several threads at once.
  virtual GenerationResponse generate(const GenerationRequest& req) = 0;
  virtual std::string model_id() const = 0;
};

// Stable content hash of (prompt, n, max_tokens, temperature, stop, model).
// Seeds and timestamps deliberately excluded so cache replay works across
// runs. 64-bit FNV-1a over a canonical serialization, rendered as hex.
std::string request_fingerprint(const GenerationRequest& req, const std::string& model_id);

// One scripted response rule. The first rule whose `contains` strings all
// appear in the prompt wins (an empty list matches everything). Responses are
// consumed round-robin within a request: n=5 against 2 responses yields
// r0 r1 r0 r1 r0. With `correct_prob` set, each completion instead draws from
// `responses` with that probability and from `wrong_pool` otherwise, using a
// stream seeded by (backend seed, request seed, completion index) — a pure
// function, so thread scheduling cannot change the output.
struct ScriptedRule {
  std::vector<std::string> contains;
  std::vector<std::string> responses;
  std::optional<double> correct_prob;
  std::vector<std::string> wrong_pool;
};

class ScriptedBackend : public Backend {
 public:
  ScriptedBackend(std::vector<ScriptedRule> rules, uint64_t seed);
  // JSON shape: {"rules": [{"contains": [...], "responses": [...],
  //              "noise": {"correct_prob": 0.6, "wrong_pool": [...]}}]}
  static std::vector<ScriptedRule> rules_from_json_file(const std::string& path);

  GenerationResponse generate(const GenerationRequest& req) override;
  std::string model_id() const override { return "scripted"; }

 private:
  std::vector<ScriptedRule> rules_;
  uint64_t seed_;
};

struct CacheStats {
  size_t hits = 0;
  size_t misses = 0;
};

// Caching wrapper. Cache file is <dir>/<model_id>.jsonl; each line stores the
// fingerprint, a request snapshot, and the completions. Corrupt lines are
// skipped with a warning at load. In replay mode (no inner backend calls
// allowed) a miss raises ReplayMissError carrying the fingerprint.
class CachedBackend : public Backend {
 public:
  // `inner` may be null only in replay mode; then `model_id_hint` names the
  // cache file to load.
  CachedBackend(std::shared_ptr<Backend> inner, std::string cache_dir, bool replay_only,
                std::string model_id_hint = "");

  GenerationResponse generate(const GenerationRequest& req) override;
  std::string model_id() const override { return model_id_; }

  const std::string& cache_path() const { return path_; }
  size_t record_count() const;
  CacheStats stats() const;

 private:
  std::shared_ptr<Backend> inner_;
  std::string model_id_;
  std::string path_;
  bool replay_only_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<std::string>> by_fingerprint_;
  CacheStats stats_;
};

// Offline check of a cache file: reparses every line and recomputes each
// record's fingerprint from its request snapshot.
struct CacheVerifyResult {
  size_t total = 0;            // well-formed records
  std::vector<size_t> corrupt_lines;     // 1-based line numbers that failed to parse
  std::vector<size_t> mismatched_lines;  // fingerprint does not match snapshot
  bool ok() const { return corrupt_lines.empty() && mismatched_lines.empty(); }
};
CacheVerifyResult verify_cache_file(const std::string& path);

}  // namespace selfverify
