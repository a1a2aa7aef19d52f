#include "selfverify/backend.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "selfverify/core.hpp"
#include "selfverify/errors.hpp"
#include "selfverify/rng.hpp"

namespace selfverify {

using nlohmann::json;

std::string request_fingerprint(const GenerationRequest& req, const std::string& model_id) {
  // Canonical serialization with field markers so adjacent fields cannot
  // bleed into each other. \x1f separates fields, \x1e separates stop items.
  std::string canon;
  canon.reserve(req.prompt.size() + model_id.size() + 64);
  canon += "model=";
  canon += model_id;
  canon += '\x1f';
  canon += "prompt=";
  canon += req.prompt;
  canon += '\x1f';
  canon += "n=" + std::to_string(req.n);
  canon += '\x1f';
  canon += "max_tokens=" + std::to_string(req.max_tokens);
  canon += '\x1f';
  canon += "temperature=" + format_double_shortest(req.temperature);
  canon += '\x1f';
  canon += "stop=";
  for (const auto& s : req.stop) {
    canon += s;
    canon += '\x1e';
  }
  uint64_t h = fnv1a64(canon);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptedRule> rules, uint64_t seed)
    : rules_(std::move(rules)), seed_(seed) {
  for (const auto& r : rules_) {
    if (r.responses.empty())
      throw ContractError("scripted rule has no responses");
    if (r.correct_prob && *r.correct_prob < 1.0 && r.wrong_pool.empty())
      throw ContractError("scripted noise rule needs a wrong_pool");
  }
}

std::vector<ScriptedRule> ScriptedBackend::rules_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scripted rules file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("bad scripted rules file " + path + ": " + e.what());
  }
  std::vector<ScriptedRule> rules;
  for (const auto& jr : doc.at("rules")) {
    ScriptedRule rule;
    if (jr.contains("contains"))
      for (const auto& c : jr["contains"]) rule.contains.push_back(c.get<std::string>());
    for (const auto& r : jr.at("responses")) rule.responses.push_back(r.get<std::string>());
    if (jr.contains("noise")) {
      const auto& noise = jr["noise"];
      rule.correct_prob = noise.at("correct_prob").get<double>();
      if (noise.contains("wrong_pool"))
        for (const auto& w : noise["wrong_pool"]) rule.wrong_pool.push_back(w.get<std::string>());
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

GenerationResponse ScriptedBackend::generate(const GenerationRequest& req) {
  const ScriptedRule* rule = nullptr;
  for (const auto& r : rules_) {
    bool all = true;
    for (const auto& c : r.contains)
      if (req.prompt.find(c) == std::string::npos) {
        all = false;
        break;
      }
    if (all) {
      rule = &r;
      break;
    }
  }
  if (!rule) {
    std::string head = req.prompt.substr(0, 120);
    throw ContractError("scripted backend: no rule matches prompt starting \"" + head + "\"");
  }

  GenerationResponse resp;
  resp.model_id = model_id();
  uint64_t stream = req.seed ? *req.seed : fnv1a64(req.prompt);
  for (int i = 0; i < req.n; ++i) {
    if (rule->correct_prob) {
      Rng rng(mix_seed({seed_, stream, uint64_t(i)}));
      if (rng.next_double() < *rule->correct_prob) {
        resp.completions.push_back(rule->responses[size_t(i) % rule->responses.size()]);
      } else {
        resp.completions.push_back(rule->wrong_pool[rng.below(rule->wrong_pool.size())]);
      }
    } else {
      resp.completions.push_back(rule->responses[size_t(i) % rule->responses.size()]);
    }
  }
  return resp;
}

namespace {

json request_snapshot(const GenerationRequest& req, const std::string& model_id) {
  json j;
  j["model"] = model_id;
  j["prompt"] = req.prompt;
  j["n"] = req.n;
  j["max_tokens"] = req.max_tokens;
  j["temperature"] = req.temperature;
  j["stop"] = req.stop;
  return j;
}

GenerationRequest request_from_snapshot(const json& j) {
  GenerationRequest req;
  req.prompt = j.at("prompt").get<std::string>();
  req.n = j.at("n").get<int>();
  req.max_tokens = j.at("max_tokens").get<int>();
  req.temperature = j.at("temperature").get<double>();
  for (const auto& s : j.at("stop")) req.stop.push_back(s.get<std::string>());
  return req;
}

std::string iso_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

CachedBackend::CachedBackend(std::shared_ptr<Backend> inner, std::string cache_dir,
                             bool replay_only, std::string model_id_hint)
    : inner_(std::move(inner)), replay_only_(replay_only) {
  if (!inner_ && !replay_only_)
    throw ConfigError("cache wrapper needs a live backend unless replay-only");
  model_id_ = inner_ ? inner_->model_id() : model_id_hint;
  if (model_id_.empty()) throw ConfigError("replay-only cache needs a model id");
  std::filesystem::create_directories(cache_dir);
  path_ = (std::filesystem::path(cache_dir) / (model_id_ + ".jsonl")).string();

  std::ifstream in(path_);
  if (!in) return;  // cold cache is fine (unless replayed later)
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_copy(line).empty()) continue;
    try {
      json rec = json::parse(line);
      by_fingerprint_[rec.at("fingerprint").get<std::string>()] =
          rec.at("completions").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      std::cerr << "warning: skipping corrupt cache record " << path_ << ":" << lineno << ": "
                << e.what() << "\n";
    }
  }
}

GenerationResponse CachedBackend::generate(const GenerationRequest& req) {
  std::string fp = request_fingerprint(req, model_id_);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = by_fingerprint_.find(fp);
    if (it != by_fingerprint_.end()) {
      ++stats_.hits;
      GenerationResponse resp;
      resp.completions = it->second;
      resp.model_id = model_id_;
      resp.cached = true;
      return resp;
    }
    if (replay_only_)
      throw ReplayMissError("replay-only cache has no record for fingerprint " + fp, fp);
    ++stats_.misses;
  }

  GenerationResponse resp = inner_->generate(req);  // outside the lock

  std::lock_guard<std::mutex> lock(mu_);
  if (!by_fingerprint_.count(fp)) {
    by_fingerprint_[fp] = resp.completions;
    json rec;
    rec["fingerprint"] = fp;
    rec["request"] = request_snapshot(req, model_id_);
    rec["completions"] = resp.completions;
    rec["created_at"] = iso_now();
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << rec.dump() << "\n";
    out.flush();
  }
  return resp;
}

size_t CachedBackend::record_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return by_fingerprint_.size();
}

CacheStats CachedBackend::stats() const {
  std::lock_guard<std::mutex> lock(mu_);
  return stats_;
}

CacheVerifyResult verify_cache_file(const std::string& path) {
  CacheVerifyResult result;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cache file: " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_copy(line).empty()) continue;
    try {
      json rec = json::parse(line);
      std::string stored = rec.at("fingerprint").get<std::string>();
      GenerationRequest req = request_from_snapshot(rec.at("request"));
      std::string model = rec.at("request").at("model").get<std::string>();
      (void)rec.at("completions").get<std::vector<std::string>>();
      if (request_fingerprint(req, model) != stored) {
        result.mismatched_lines.push_back(lineno);
      } else {
        ++result.total;
      }
    } catch (const json::exception&) {
      result.corrupt_lines.push_back(lineno);
    }
  }
  return result;
}

}  // namespace selfverify
