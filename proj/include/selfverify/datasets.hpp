#pragma once

// Dataset loaders. Named loaders parse the official release formats for
// GSM8K (JSONL question/answer with "#### <gold>"), AQuA (JSONL
// question/options/correct) and SVAMP (JSON array Body/Question/Answer); a
// generic field-map loader covers the other arithmetic sets, CommonsenseQA
// and date understanding so adding a dataset needs no code change. Known
// dataset names carry expected record counts; a mismatch is reported as a
// warning, never an error.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selfverify/core.hpp"
#include "selfverify/prompts.hpp"

namespace selfverify {

struct DatasetConfig {
  std::string name;   // gsm8k, aqua, svamp, singleeq, addsub, multiarith,
                      // csqa, date, synthetic, or custom
  std::string path;   // unused for synthetic
  int count = 200;    // synthetic only: number of problems
  // Generic loader controls; dotted paths into each JSON record. Recognized
  // keys: root (path to the record array), question, answer, choices, and
  // format (a core.hpp answer format name). Named datasets fill these with
  // defaults; custom datasets must set them.
  std::map<std::string, std::string> field_map;
};

std::vector<Problem> load_gsm8k(const std::string& path, std::vector<std::string>* warnings = nullptr);
std::vector<Problem> load_aqua(const std::string& path, std::vector<std::string>* warnings = nullptr);
std::vector<Problem> load_svamp(const std::string& path, std::vector<std::string>* warnings = nullptr);
std::vector<Problem> load_generic(const std::string& path,
                                  const std::map<std::string, std::string>& field_map,
                                  const std::string& id_prefix,
                                  std::vector<std::string>* warnings = nullptr);

// Deterministic arithmetic word problems built from a few templates
// (2–4 condition sentences, integer operands in [2, 99], distinct within a
// problem). Problem ids end in "-t<template>" so tests can recompute gold
// from the surface text alone. Same (n, seed) -> byte-identical problems.
std::vector<Problem> gen_synthetic(int n, uint64_t seed);

// Dispatch by DatasetConfig::name, applying per-name defaults and the count
// check. `seed` feeds gen_synthetic only.
std::vector<Problem> load_dataset(const DatasetConfig& cfg, uint64_t seed,
                                  std::vector<std::string>* warnings = nullptr);

// Which prompt family a dataset name uses.
PromptFamily family_for_dataset(const std::string& name);
// Expected record count for official sets (nullopt for synthetic/custom).
std::optional<size_t> expected_dataset_count(const std::string& name);

}  // namespace selfverify
