#include "selfverify/config.hpp"

#include <filesystem>

#include "selfverify/errors.hpp"
#include "selfverify/eval.hpp"
#include "selfverify/http_backend.hpp"
#include "selfverify/kvfile.hpp"

namespace selfverify {

namespace fs = std::filesystem;

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_absolute()) return path.string();
  return (base / path).lexically_normal().string();
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  KvDoc doc;
  try {
    doc = kv_parse_file(path);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  fs::path base = fs::path(path).parent_path();

  ExperimentConfig cfg;
  try {
    cfg.backend.kind = doc.get_str_or("backend.kind", "scripted");
    cfg.backend.rules_path = resolve(base, doc.get_str_or("backend.rules", ""));
    cfg.backend.endpoint = doc.get_str_or("backend.endpoint", "");
    cfg.backend.model = doc.get_str_or("backend.model", "");

    cfg.dataset.name = doc.get_str_or("dataset.name", "synthetic");
    cfg.dataset.path = resolve(base, doc.get_str_or("dataset.path", ""));
    cfg.dataset.count = int(doc.get_int_or("dataset.count", 200));
    for (const char* key : {"root", "question", "answer", "choices", "format"}) {
      std::string v = doc.get_str_or(std::string("dataset.field_map.") + key, "");
      if (!v.empty()) cfg.dataset.field_map[key] = v;
    }

    cfg.prompt_dir = resolve(base, doc.get_str_or("prompt_dir", "prompts"));
    cfg.methods = doc.get_list_or("methods", {"sv"});

    cfg.pipeline.K = int(doc.get_int_or("K", 5));
    cfg.pipeline.P = int(doc.get_int_or("P", 10));
    cfg.pipeline.max_tokens = int(doc.get_int_or("max_tokens", 168));
    cfg.pipeline.mode = verification_mode_from_string(doc.get_str_or("mode", "cmv"));
    cfg.pipeline.temperature = doc.get_num_or("temperature", 0.7);
    cfg.pipeline.repeats = int(doc.get_int_or("repeats", 3));
    cfg.pipeline.stop = doc.get_list_or("stop", {"\n\nQ:"});
    cfg.pipeline.seed = uint64_t(doc.get_int_or("seed", 0));
    cfg.pipeline.concurrency = int(doc.get_int_or("concurrency", 4));
    cfg.pipeline.batch_forward = doc.get_bool_or("batch_forward", true);
    cfg.pipeline.strict_appendix = doc.get_bool_or("strict_appendix", false);

    cfg.output_dir = resolve(base, doc.get_str_or("output_dir", "out"));
    cfg.cache_dir = resolve(base, doc.get_str_or("cache_dir", ""));
    cfg.replay_only = doc.get_bool_or("replay_only", false);
  } catch (const ParseError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  const auto& p = cfg.pipeline;
  if (p.K < 1) throw ConfigError("K must be >= 1");
  if (p.P < 1) throw ConfigError("P must be >= 1");
  if (p.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (p.repeats < 1) throw ConfigError("repeats must be >= 1");
  if (p.concurrency < 1) throw ConfigError("concurrency must be >= 1");
  if (p.temperature < 0.0 || p.temperature > 2.0)
    throw ConfigError("temperature must be in [0, 2]");

  if (cfg.backend.kind == "scripted") {
    // Replay-only runs never touch the live backend, so the rules file may
    // be absent there.
    if (!cfg.replay_only) {
      if (cfg.backend.rules_path.empty())
        throw ConfigError("scripted backend needs backend.rules");
      if (!fs::exists(cfg.backend.rules_path))
        throw ConfigError("scripted rules file not found: " + cfg.backend.rules_path);
    }
  } else if (cfg.backend.kind == "http") {
    if (!cfg.replay_only && cfg.backend.endpoint.empty())
      throw ConfigError("http backend needs backend.endpoint");
    if (cfg.backend.model.empty()) throw ConfigError("http backend needs backend.model");
  } else {
    throw ConfigError("unknown backend.kind: " + cfg.backend.kind);
  }

  for (const auto& m : cfg.methods) method_from_string(m);  // throws on junk

  if (cfg.dataset.name != "synthetic") {
    if (cfg.dataset.path.empty())
      throw ConfigError("dataset.path required for dataset " + cfg.dataset.name);
    if (!fs::exists(cfg.dataset.path))
      throw ConfigError("dataset file not found: " + cfg.dataset.path);
  } else if (cfg.dataset.count < 1) {
    throw ConfigError("dataset.count must be >= 1 for synthetic data");
  }

  if (cfg.replay_only && cfg.cache_dir.empty())
    throw ConfigError("replay_only needs cache_dir");

  // Prompt fixtures must resolve for the dataset's family before any backend
  // call is made.
  PromptLibrary lib = PromptLibrary::load_dir(cfg.prompt_dir);
  PromptFamily family = family_for_dataset(cfg.dataset.name);
  lib.require(family, PromptKind::Forward);
  lib.require(family, cfg.pipeline.mode == VerificationMode::CMV ? PromptKind::CMV
                                                                 : PromptKind::TFV);
}

std::unique_ptr<Backend> make_backend(const ExperimentConfig& cfg, CachedBackend** cached_view) {
  if (cached_view) *cached_view = nullptr;
  std::shared_ptr<Backend> inner;
  std::string model_hint;
  if (cfg.replay_only) {
    // No live backend: every request must come from the cache.
    model_hint = cfg.backend.kind == "scripted" ? "scripted" : cfg.backend.model;
  } else if (cfg.backend.kind == "scripted") {
    inner = std::make_shared<ScriptedBackend>(
        ScriptedBackend::rules_from_json_file(cfg.backend.rules_path), cfg.pipeline.seed);
  } else {
    HttpBackendOptions options;
    options.endpoint = cfg.backend.endpoint;
    options.model = cfg.backend.model;
    inner = std::make_shared<HttpBackend>(options);
  }

  if (cfg.cache_dir.empty()) {
    struct Owner : Backend {  // thin owner so we can return a unique_ptr
      std::shared_ptr<Backend> held;
      explicit Owner(std::shared_ptr<Backend> b) : held(std::move(b)) {}
      GenerationResponse generate(const GenerationRequest& req) override {
        return held->generate(req);
      }
      std::string model_id() const override { return held->model_id(); }
    };
    return std::make_unique<Owner>(std::move(inner));
  }

  auto cached = std::make_unique<CachedBackend>(inner, cfg.cache_dir, cfg.replay_only, model_hint);
  if (cached_view) *cached_view = cached.get();
  return cached;
}

}  // namespace selfverify
