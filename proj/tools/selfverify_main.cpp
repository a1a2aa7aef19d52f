// Command-line front end for the self-verification pipeline.
//
//   selfverify run <config.conf> [--seed N] [--K N] [--P N] [--prompt-dir D]
//                  [--replay-only] [--out D]
//   selfverify probe --config <config.conf> --text "..." [--answer A]...
//                  [--mode cmv|tfv] [--format number|choice|...]
//   selfverify cache stats  --file <cache.jsonl>
//   selfverify cache verify --file <cache.jsonl>
//
// Exit codes: 0 success, 1 unexpected error, 2 configuration error,
// 3 backend/replay error, 4 cache verification failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "selfverify/backend.hpp"
#include "selfverify/cleansing.hpp"
#include "selfverify/config.hpp"
#include "selfverify/core.hpp"
#include "selfverify/datasets.hpp"
#include "selfverify/errors.hpp"
#include "selfverify/eval.hpp"
#include "selfverify/pipeline.hpp"
#include "selfverify/prompts.hpp"

namespace fs = std::filesystem;
using namespace selfverify;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitCacheBad = 4;

struct RunArgs {
  std::string config_path;
  std::optional<long long> seed;
  std::optional<int> k;
  std::optional<int> p;
  std::string prompt_dir;
  std::string out_dir;
  bool replay_only = false;
};

void write_text_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << body;
}

void write_last_stats(const CachedBackend& cache) {
  const CacheStats st = cache.stats();
  std::string body = "{\"hits\": " + std::to_string(st.hits) +
                     ", \"misses\": " + std::to_string(st.misses) + "}\n";
  write_text_file(cache.cache_path() + ".laststats.json", body);
}

int cmd_run(const RunArgs& args) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(args.config_path);
    if (args.seed) cfg.pipeline.seed = static_cast<std::uint64_t>(*args.seed);
    if (args.k) cfg.pipeline.K = *args.k;
    if (args.p) cfg.pipeline.P = *args.p;
    if (!args.prompt_dir.empty()) cfg.prompt_dir = args.prompt_dir;
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (args.replay_only) cfg.replay_only = true;
    validate_config(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::vector<std::string> warnings;
  std::vector<Problem> problems;
  try {
    problems = load_dataset(cfg.dataset, cfg.pipeline.seed, &warnings);
  } catch (const Error& e) {
    std::cerr << "dataset error: " << e.what() << "\n";
    return kExitConfig;
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  PromptLibrary prompts = PromptLibrary::load_dir(cfg.prompt_dir);

  CachedBackend* cache_view = nullptr;
  std::unique_ptr<Backend> backend;
  try {
    backend = make_backend(cfg, &cache_view);
  } catch (const AuthError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const PromptFamily family = family_for_dataset(cfg.dataset.name);
  fs::create_directories(cfg.output_dir);
  const fs::path trace_path = fs::path(cfg.output_dir) / "trace.jsonl";
  std::ofstream trace_out(trace_path, std::ios::binary | std::ios::trunc);
  if (!trace_out) {
    std::cerr << "cannot write " << trace_path.string() << "\n";
    return kExitError;
  }

  RunReport report;
  report.dataset = cfg.dataset.name;
  try {
    for (const std::string& name : cfg.methods) {
      const Method m = method_from_string(name);
      report.methods.push_back(
          run_method(m, problems, prompts, family, cfg.pipeline, *backend, &trace_out));
    }
  } catch (const ReplayMissError& e) {
    trace_out.flush();
    if (cache_view) write_last_stats(*cache_view);
    std::cerr << "replay miss: " << e.what() << "\n";
    return kExitBackend;
  } catch (const AuthError& e) {
    trace_out.flush();
    if (cache_view) write_last_stats(*cache_view);
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  }

  trace_out.flush();
  const std::string table = format_report_table({report});
  write_text_file(fs::path(cfg.output_dir) / "report.txt", table);
  write_text_file(fs::path(cfg.output_dir) / "report.csv", format_report_csv({report}));
  if (cache_view) write_last_stats(*cache_view);
  std::cout << table;
  return kExitOk;
}

struct ProbeArgs {
  std::string config_path;
  std::string text;
  std::vector<std::string> answers;
  std::string mode;
  std::string format = "number";
};

// Inspect the verification stage on one problem: show the candidate set,
// every verification task body, each probe completion with its match flag,
// and the final selection.
int cmd_probe(const ProbeArgs& args) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(args.config_path);
    if (!args.mode.empty()) cfg.pipeline.mode = verification_mode_from_string(args.mode);
    validate_config(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  AnswerFormat format;
  try {
    format = answer_format_from_string(args.format);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  PromptLibrary prompts = PromptLibrary::load_dir(cfg.prompt_dir);
  CachedBackend* cache_view = nullptr;
  std::unique_ptr<Backend> backend;
  try {
    backend = make_backend(cfg, &cache_view);
  } catch (const AuthError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  }

  Problem problem = make_problem("probe-0", args.text, format, std::nullopt);
  const PromptFamily family = family_for_dataset(cfg.dataset.name);
  ProblemTrace trace;
  try {
    if (args.answers.empty()) {
      PipelineResult result = run_problem(problem, prompts, family, cfg.pipeline, *backend);
      trace = result.trace;
    } else {
      // Candidates supplied on the command line: skip forward reasoning and
      // verify exactly these answers.
      trace.problem_id = problem.id;
      std::vector<Candidate> candidates;
      for (std::size_t i = 0; i < args.answers.size(); ++i) {
        CleansingOutcome out = clean_for_format(format, args.answers[i],
                                                cfg.pipeline.strict_appendix);
        if (!out.answer) {
          std::cerr << "could not interpret answer '" << args.answers[i]
                    << "' as " << args.format << "\n";
          return kExitConfig;
        }
        bool merged = false;
        for (auto& c : candidates) {
          if (answers_equal(c.answer, *out.answer)) {
            ++c.forward_count;
            merged = true;
            break;
          }
        }
        if (!merged)
          candidates.push_back(Candidate{*out.answer, 1, static_cast<int>(i), {}});
      }
      trace.candidates = candidates;
      VerificationMode mode = cfg.pipeline.mode;
      if (mode == VerificationMode::CMV) {
        bool any_numeric = false;
        for (const auto& c : problem.conditions)
          if (!c.numeric_tokens.empty()) any_numeric = true;
        if (!any_numeric) {
          mode = VerificationMode::TFV;
          trace.fell_back_to_tfv = true;
        }
      }
      std::vector<VerificationTask> tasks;
      std::vector<Conclusion> conclusions;
      for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        Conclusion conc = rewrite_conclusion(problem, candidates[ci],
                                             static_cast<int>(ci), cfg.pipeline,
                                             *backend, &trace);
        conclusions.push_back(conc);
        if (mode == VerificationMode::CMV) {
          auto vts = mask_variants(problem, conc);
          tasks.insert(tasks.end(), vts.begin(), vts.end());
        } else {
          tasks.push_back(tfv_task(problem, conc));
        }
      }
      trace.conclusions = conclusions;
      trace.tasks = tasks;
      const PromptSet& probe_ps = prompts.require(
          family, mode == VerificationMode::CMV ? PromptKind::CMV : PromptKind::TFV);
      auto outcomes = run_probes(tasks, probe_ps, cfg.pipeline, *backend, &trace);
      std::vector<VerificationScore> scores;
      for (std::size_t ci = 0; ci < candidates.size(); ++ci)
        scores.push_back(score_candidate(static_cast<int>(ci), outcomes, mode));
      trace.scores = scores;
      int sel = select_index(candidates, scores);
      trace.selected = candidates[static_cast<std::size_t>(sel)].answer;
    }
  } catch (const ReplayMissError& e) {
    std::cerr << "replay miss: " << e.what() << "\n";
    return kExitBackend;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }

  std::cout << "candidates:\n";
  for (std::size_t i = 0; i < trace.candidates.size(); ++i) {
    const auto& c = trace.candidates[i];
    std::cout << "  [" << i << "] " << c.answer.surface()
              << "  (forward_count=" << c.forward_count
              << ", first_sample=" << c.first_sample_index << ")\n";
  }
  if (trace.fell_back_to_tfv)
    std::cout << "note: no numeric conditions to mask; fell back to true-false "
                 "verification\n";
  std::cout << "verification tasks:\n";
  for (const auto& t : trace.tasks) {
    std::cout << "  candidate " << t.candidate_index << " variant "
              << t.variant_index << ": " << t.prompt_body << "\n";
    if (t.expected)
      std::cout << "    expects: " << format_double_shortest(*t.expected) << "\n";
  }
  std::cout << "probes:\n";
  for (const auto& p : trace.probes) {
    std::cout << "  c" << p.candidate_index << " v" << p.variant_index << " p"
              << p.probe_index << ": "
              << (p.matched ? "match    " : "mismatch ") << "| "
              << p.raw_completion << "\n";
  }
  std::cout << "scores:\n";
  for (const auto& s : trace.scores) {
    std::cout << "  candidate " << s.candidate_index << ": total=" << s.total
              << " per-variant=[";
    for (std::size_t i = 0; i < s.per_variant.size(); ++i) {
      if (i) std::cout << ", ";
      std::cout << s.per_variant[i];
    }
    std::cout << "]\n";
  }
  if (trace.selected)
    std::cout << "selected: " << trace.selected->surface() << "\n";
  return kExitOk;
}

int cmd_cache_stats(const std::string& file) {
  CacheVerifyResult r = verify_cache_file(file);
  std::cout << "records: " << r.total << "\n"
            << "corrupt lines: " << r.corrupt_lines.size() << "\n"
            << "mismatched fingerprints: " << r.mismatched_lines.size() << "\n";
  return kExitOk;
}

int cmd_cache_verify(const std::string& file) {
  CacheVerifyResult r = verify_cache_file(file);
  if (r.ok()) {
    std::cout << "ok: " << r.total << " records\n";
    return kExitOk;
  }
  for (std::size_t line : r.corrupt_lines)
    std::cerr << "corrupt record at line " << line << "\n";
  for (std::size_t line : r.mismatched_lines)
    std::cerr << "fingerprint mismatch at line " << line << "\n";
  return kExitCacheBad;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage answer selection: sample candidate answers, then "
               "verify each one backward against the problem statement"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("config", run_args.config_path, "Experiment config file")
      ->required();
  long long seed_opt = 0;
  int k_opt = 0, p_opt = 0;
  auto* seed_flag = run->add_option("--seed", seed_opt, "Override the base seed");
  auto* k_flag = run->add_option("--K", k_opt, "Override candidate sample count");
  auto* p_flag = run->add_option("--P", p_opt, "Override probe count");
  run->add_option("--prompt-dir", run_args.prompt_dir, "Override the prompt directory");
  run->add_option("--out", run_args.out_dir, "Override the output directory");
  run->add_flag("--replay-only", run_args.replay_only,
                "Serve every request from the cache; fail on a miss");

  ProbeArgs probe_args;
  auto* probe = app.add_subcommand("probe", "Inspect verification of one problem");
  probe->add_option("--config", probe_args.config_path, "Experiment config file")
      ->required();
  probe->add_option("--text", probe_args.text, "Problem text")->required();
  probe->add_option("--answer", probe_args.answers,
                    "Candidate answer (repeatable); omit to sample candidates");
  probe->add_option("--mode", probe_args.mode, "cmv or tfv");
  probe->add_option("--format", probe_args.format,
                    "Answer format: number, choice, true_false, yes_no, date, free");

  auto* cache = app.add_subcommand("cache", "Inspect a completion cache file");
  cache->require_subcommand(1);
  std::string stats_file, verify_file;
  auto* stats = cache->add_subcommand("stats", "Print record counts");
  stats->add_option("--file", stats_file, "Cache file")->required();
  auto* verify = cache->add_subcommand("verify", "Recompute fingerprints");
  verify->add_option("--file", verify_file, "Cache file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (*seed_flag) run_args.seed = seed_opt;
      if (*k_flag) run_args.k = k_opt;
      if (*p_flag) run_args.p = p_opt;
      return cmd_run(run_args);
    }
    if (*probe) return cmd_probe(probe_args);
    if (*stats) return cmd_cache_stats(stats_file);
    if (*verify) return cmd_cache_verify(verify_file);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}
