#pragma once

// Evaluation harness: solve-rate metric, the baselines (greedy
// chain-of-thought, self-consistency majority vote), full self-verification,
// and the combination that verifies only the two most frequent candidates.
// Runners repeat the experiment `repeats` times with seeds seed+0..seed+r-1,
// evaluate problems on a small worker pool, and fold results in problem
// order so traces and reports are byte-stable.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "selfverify/pipeline.hpp"

namespace selfverify {

enum class Method { CoT, SC, SV, SC2SV };
const char* to_string(Method m);
Method method_from_string(const std::string& s);

// 100 * correct / total, comparing with answers_equal. Absent predictions
// count as wrong. An empty run scores 0.0 and appends a warning; mismatched
// lengths throw LengthMismatchError.
double solve_rate(const std::vector<std::optional<Answer>>& predictions,
                  const std::vector<Answer>& gold,
                  std::vector<std::string>* warnings = nullptr);

struct MethodRun {
  Method method = Method::SV;
  std::vector<double> per_repeat;  // solve rate per repeat
  double mean = 0.0;
};

struct RunReport {
  std::string dataset;
  std::vector<MethodRun> methods;
};

// Per-method runners. Traces (one JSON line per problem per repeat, in
// (repeat, problem) order) go to `trace_out` when non-null. Per-problem
// failures count as wrong answers; replay misses and auth errors abort the
// run.
MethodRun run_greedy_cot(const std::vector<Problem>& problems, const PromptLibrary& prompts,
                         PromptFamily family, const PipelineConfig& cfg, Backend& backend,
                         std::ostream* trace_out = nullptr);
MethodRun run_self_consistency(const std::vector<Problem>& problems, const PromptLibrary& prompts,
                               PromptFamily family, const PipelineConfig& cfg, Backend& backend,
                               std::ostream* trace_out = nullptr);
MethodRun run_sv(const std::vector<Problem>& problems, const PromptLibrary& prompts,
                 PromptFamily family, const PipelineConfig& cfg, Backend& backend,
                 std::ostream* trace_out = nullptr);
MethodRun run_sc_top2_sv(const std::vector<Problem>& problems, const PromptLibrary& prompts,
                         PromptFamily family, const PipelineConfig& cfg, Backend& backend,
                         std::ostream* trace_out = nullptr);

MethodRun run_method(Method method, const std::vector<Problem>& problems,
                     const PromptLibrary& prompts, PromptFamily family, const PipelineConfig& cfg,
                     Backend& backend, std::ostream* trace_out = nullptr);

// The two most frequent candidates (ties by earlier first sample), as
// indices into `candidates`, most frequent first. Exposed for testing.
std::vector<int> top_two_candidates(const std::vector<Candidate>& candidates);

// Majority-vote pick for self-consistency: highest forward count, ties by
// earliest first sample. Returns candidate index.
int majority_index(const std::vector<Candidate>& candidates);

// Reports: an aligned text table (methods as rows, datasets as columns,
// mean solve rates) and a CSV with one row per (dataset, method, repeat).
std::string format_report_table(const std::vector<RunReport>& reports);
std::string format_report_csv(const std::vector<RunReport>& reports);

// One trace line (no trailing newline) for a solved problem.
std::string trace_to_json(const ProblemTrace& trace, Method method);

}  // namespace selfverify
