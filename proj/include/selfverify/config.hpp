#pragma once

// Declarative run configuration. One kvfile (see kvfile.hpp) describes the
// backend, dataset, prompts, pipeline knobs, methods, and output locations;
// relative paths resolve against the config file's directory. See the README
// for the full key list.

#include <memory>
#include <string>
#include <vector>

#include "selfverify/backend.hpp"
#include "selfverify/datasets.hpp"
#include "selfverify/pipeline.hpp"

namespace selfverify {

struct BackendSetup {
  std::string kind;        // "scripted" | "http"
  std::string rules_path;  // scripted
  std::string endpoint;    // http
  std::string model;       // http
};

struct ExperimentConfig {
  BackendSetup backend;
  DatasetConfig dataset;
  std::string prompt_dir = "prompts";
  std::vector<std::string> methods = {"sv"};
  PipelineConfig pipeline;
  std::string output_dir = "out";
  std::string cache_dir;  // empty disables caching
  bool replay_only = false;
};

// Parse + resolve relative paths. Throws ConfigError naming the file and the
// offending key.
ExperimentConfig load_experiment_config(const std::string& path);

// Existence/bounds/fixture checks. Throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

// Backend factory: scripted or http, optionally wrapped in the cache.
// `cached_view` (optional) receives the wrapper when caching is active.
std::unique_ptr<Backend> make_backend(const ExperimentConfig& cfg,
                                      CachedBackend** cached_view = nullptr);

}  // namespace selfverify
