#pragma once

// The two-stage pipeline: sample K chain-of-thought answers forward, restate
// each candidate as a declarative conclusion, then verify backward — either
// by masking each numeric condition token with 'X' and asking the model to
// recover it (CMV), or by asking for a True/False judgment of the whole
// statement (TFV). Each verification task is probed P times; a candidate's
// score is the number of matching probes summed over its tasks, and the
// highest-scoring candidate wins (ties: higher forward count, then earlier
// first sample).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selfverify/backend.hpp"
#include "selfverify/core.hpp"
#include "selfverify/prompts.hpp"

namespace selfverify {

enum class VerificationMode { CMV, TFV };
const char* to_string(VerificationMode m);
VerificationMode verification_mode_from_string(const std::string& s);

struct PipelineConfig {
  int K = 5;             // forward samples
  int P = 10;            // probes per verification task
  int max_tokens = 168;
  VerificationMode mode = VerificationMode::CMV;
  double temperature = 0.7;
  int repeats = 3;
  std::vector<std::string> stop = {"\n\nQ:"};
  uint64_t seed = 0;
  int concurrency = 4;         // worker threads / in-flight request bound
  bool batch_forward = true;   // one n=K request vs. K single requests
  bool strict_appendix = false;  // see cleansing.hpp
};

struct VerificationTask {
  VerificationMode mode = VerificationMode::CMV;
  int candidate_index = 0;
  int variant_index = 0;             // which masked token (always 0 for TFV)
  std::string prompt_body;           // masked conditions + conclusion (CMV) or
                                     // conditions + conclusion (TFV)
  std::optional<double> expected;    // CMV: the masked token's value
};

struct ProbeOutcome {
  int candidate_index = 0;
  int variant_index = 0;
  int probe_index = 0;
  std::string raw_completion;
  std::optional<Answer> extracted;
  bool matched = false;
};

struct VerificationScore {
  int candidate_index = 0;
  std::vector<int> per_variant;
  int total = 0;
};

struct BackendCall {
  std::string stage;  // "forward" | "rewrite" | "probe"
  int n = 0;
  bool cached = false;
};

// Everything that happened while solving one problem; serialized as one
// JSONL record by the eval layer.
struct ProblemTrace {
  std::string problem_id;
  int repeat = 0;
  std::vector<Candidate> candidates;
  std::vector<Conclusion> conclusions;
  std::vector<VerificationTask> tasks;
  std::vector<ProbeOutcome> probes;
  std::vector<VerificationScore> scores;
  std::optional<Answer> selected;
  std::optional<Answer> gold;
  std::optional<bool> correct;
  std::vector<BackendCall> calls;
  bool fell_back_to_tfv = false;
  std::string error;  // non-empty when the problem failed
};

// Stage 1: sample K completions, cleanse each to an answer, and group equal
// answers into candidates ordered by first appearance. Throws
// AllExtractionsFailedError when no sample yields an answer.
std::vector<Candidate> forward_reason(const Problem& problem, const PromptSet& forward_ps,
                                      const PipelineConfig& cfg, Backend& backend,
                                      ProblemTrace* trace = nullptr);

// Stage 2a: rewrite question + candidate answer into a declarative sentence
// at temperature 0. Falls back to the template `The answer of "{q}" is {y}.`
// whenever the completion does not contain the answer's surface form.
Conclusion rewrite_conclusion(const Problem& problem, const Candidate& candidate,
                              int candidate_index, const PipelineConfig& cfg, Backend& backend,
                              ProblemTrace* trace = nullptr);

// Stage 2b (CMV): one task per numeric condition token in document order.
// The chosen token's value is masked as 'X' everywhere it occurs within its
// own condition; the question is dropped and the conclusion appended as the
// final sentence. Throws NoMaskableTokensError when the problem has no
// numeric tokens.
std::vector<VerificationTask> mask_variants(const Problem& problem, const Conclusion& conclusion);

// Stage 2b (TFV): a single task whose body is all conditions plus the
// conclusion.
VerificationTask tfv_task(const Problem& problem, const Conclusion& conclusion);

// Stage 2c: P probes per task. CMV completions cleanse as numbers and match
// when equal to the masked value; TFV completions cleanse as True/False and
// match on True. A task whose backend call fails yields P unmatched probes.
std::vector<ProbeOutcome> run_probes(const std::vector<VerificationTask>& tasks,
                                     const PromptSet& ps, const PipelineConfig& cfg,
                                     Backend& backend, ProblemTrace* trace = nullptr);

// Indicator sum for one candidate: per-variant match counts and their total.
VerificationScore score_candidate(int candidate_index, const std::vector<ProbeOutcome>& outcomes,
                                  VerificationMode mode);

// Argmax over total score; ties go to the higher forward count, then the
// earlier first sample. Returns the candidate index.
int select_index(const std::vector<Candidate>& candidates,
                 const std::vector<VerificationScore>& scores);
Answer select(const std::vector<Candidate>& candidates,
              const std::vector<VerificationScore>& scores);

// One problem end-to-end (forward -> rewrite -> verify -> select), recording
// a full trace. CMV problems without numeric tokens fall back to TFV.
struct PipelineResult {
  Answer selected;
  ProblemTrace trace;
};
PipelineResult run_problem(const Problem& problem, const PromptLibrary& prompts,
                           PromptFamily family, const PipelineConfig& cfg, Backend& backend);

}  // namespace selfverify
