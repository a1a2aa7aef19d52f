#include "selfverify/pipeline.hpp"

#include <algorithm>

#include "selfverify/cleansing.hpp"
#include "selfverify/errors.hpp"
#include "selfverify/rng.hpp"

namespace selfverify {

const char* to_string(VerificationMode m) {
  return m == VerificationMode::CMV ? "cmv" : "tfv";
}

VerificationMode verification_mode_from_string(const std::string& s) {
  if (s == "cmv") return VerificationMode::CMV;
  if (s == "tfv") return VerificationMode::TFV;
  throw ParseError("unknown verification mode: " + s);
}

namespace {

// Call-site stream ids for the scripted backend. Mixing the problem id keeps
// streams apart across problems; the stage tags keep forward/rewrite/probe
// streams apart within one.
constexpr uint64_t kStageForward = 0xf0f0;
constexpr uint64_t kStageRewrite = 0x4e4e;
constexpr uint64_t kStageProbe = 0x9b9b;

uint64_t call_stream(const PipelineConfig& cfg, const Problem& problem, uint64_t stage,
                     uint64_t a = 0, uint64_t b = 0) {
  return mix_seed({cfg.seed, fnv1a64(problem.id), stage, a, b});
}

void log_call(ProblemTrace* trace, const char* stage, int n, bool cached) {
  if (trace) trace->calls.push_back(BackendCall{stage, n, cached});
}

}  // namespace

std::vector<Candidate> forward_reason(const Problem& problem, const PromptSet& forward_ps,
                                      const PipelineConfig& cfg, Backend& backend,
                                      ProblemTrace* trace) {
  if (forward_ps.kind != PromptKind::Forward)
    throw KindMismatchError("forward_reason needs a forward prompt set, got " +
                            std::string(to_string(forward_ps.kind)));

  GenerationRequest req;
  req.prompt = render_forward(forward_ps, problem);
  req.max_tokens = cfg.max_tokens;
  req.temperature = cfg.temperature;
  req.stop = cfg.stop;

  std::vector<std::string> samples;
  if (cfg.batch_forward) {
    req.n = cfg.K;
    req.seed = call_stream(cfg, problem, kStageForward);
    GenerationResponse resp = backend.generate(req);
    log_call(trace, "forward", cfg.K, resp.cached);
    samples = std::move(resp.completions);
  } else {
    req.n = 1;
    for (int k = 0; k < cfg.K; ++k) {
      req.seed = call_stream(cfg, problem, kStageForward, uint64_t(k));
      GenerationResponse resp = backend.generate(req);
      log_call(trace, "forward", 1, resp.cached);
      samples.push_back(resp.completions.at(0));
    }
  }

  std::vector<Candidate> candidates;
  for (size_t k = 0; k < samples.size(); ++k) {
    CleansingOutcome outcome =
        clean_for_format(problem.format, samples[k], cfg.strict_appendix);
    if (!outcome.answer) continue;
    bool grouped = false;
    for (auto& cand : candidates) {
      if (answers_equal(cand.answer, *outcome.answer)) {
        ++cand.forward_count;
        cand.cot_texts.push_back(samples[k]);
        grouped = true;
        break;
      }
    }
    if (!grouped) {
      Candidate cand;
      cand.answer = *outcome.answer;
      cand.forward_count = 1;
      cand.first_sample_index = int(k);
      cand.cot_texts.push_back(samples[k]);
      candidates.push_back(std::move(cand));
    }
  }
  if (candidates.empty())
    throw AllExtractionsFailedError("no forward sample produced an answer for " + problem.id);
  if (trace) trace->candidates = candidates;
  return candidates;
}

Conclusion rewrite_conclusion(const Problem& problem, const Candidate& candidate,
                              int candidate_index, const PipelineConfig& cfg, Backend& backend,
                              ProblemTrace* trace) {
  GenerationRequest req;
  req.prompt = render_rewrite(problem.question, candidate.answer);
  req.n = 1;
  req.max_tokens = cfg.max_tokens;
  req.temperature = 0.0;  // greedy: one canonical restatement
  req.stop = cfg.stop;
  req.seed = call_stream(cfg, problem, kStageRewrite, uint64_t(candidate_index));

  std::string text;
  try {
    GenerationResponse resp = backend.generate(req);
    log_call(trace, "rewrite", 1, resp.cached);
    text = trim_copy(resp.completions.at(0));
    // Completions sometimes run on; keep the first line only.
    size_t nl = text.find('\n');
    if (nl != std::string::npos) text = trim_copy(text.substr(0, nl));
  } catch (const ReplayMissError&) {
    throw;
  } catch (const AuthError&) {
    throw;
  } catch (const Error&) {
    text.clear();  // transport trouble: the template below covers us
  }

  Conclusion conclusion;
  conclusion.candidate_index = candidate_index;
  std::string surface = candidate.answer.surface();
  if (text.empty() || text.find(surface) == std::string::npos) {
    conclusion.text = "The answer of \"" + problem.question + "\" is " + surface + ".";
    conclusion.from_template = true;
  } else {
    conclusion.text = text;
    char last = conclusion.text.back();
    if (last != '.' && last != '?' && last != '!') conclusion.text += '.';
  }
  if (trace) trace->conclusions.push_back(conclusion);
  return conclusion;
}

namespace {

// All condition tokens in document order as (condition, token) index pairs.
std::vector<std::pair<size_t, size_t>> token_order(const Problem& problem) {
  std::vector<std::pair<size_t, size_t>> order;
  for (size_t c = 0; c < problem.conditions.size(); ++c)
    for (size_t t = 0; t < problem.conditions[c].numeric_tokens.size(); ++t)
      order.emplace_back(c, t);
  return order;
}

// Condition text with every token whose value equals `value` replaced by 'X'
// (quoted), spans applied right-to-left so offsets stay valid.
std::string mask_condition(const Condition& cond, double value) {
  std::string text = cond.text;
  for (auto it = cond.numeric_tokens.rbegin(); it != cond.numeric_tokens.rend(); ++it) {
    if (it->value == value)
      text.replace(it->begin, it->end - it->begin, "'X'");
  }
  return text;
}

}  // namespace

std::vector<VerificationTask> mask_variants(const Problem& problem, const Conclusion& conclusion) {
  auto order = token_order(problem);
  if (order.empty())
    throw NoMaskableTokensError("no numeric condition tokens in " + problem.id);

  std::vector<VerificationTask> tasks;
  for (size_t v = 0; v < order.size(); ++v) {
    auto [ci, ti] = order[v];
    const NumericToken& chosen = problem.conditions[ci].numeric_tokens[ti];
    std::string body;
    for (size_t c = 0; c < problem.conditions.size(); ++c) {
      if (!body.empty()) body += ' ';
      body += (c == ci) ? mask_condition(problem.conditions[c], chosen.value)
                        : problem.conditions[c].text;
    }
    if (!body.empty()) body += ' ';
    body += conclusion.text;

    VerificationTask task;
    task.mode = VerificationMode::CMV;
    task.candidate_index = conclusion.candidate_index;
    task.variant_index = int(v);
    task.prompt_body = std::move(body);
    task.expected = chosen.value;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

VerificationTask tfv_task(const Problem& problem, const Conclusion& conclusion) {
  std::string body;
  for (const auto& cond : problem.conditions) {
    if (!body.empty()) body += ' ';
    body += cond.text;
  }
  if (!body.empty()) body += ' ';
  body += conclusion.text;

  VerificationTask task;
  task.mode = VerificationMode::TFV;
  task.candidate_index = conclusion.candidate_index;
  task.variant_index = 0;
  task.prompt_body = std::move(body);
  return task;
}

std::vector<ProbeOutcome> run_probes(const std::vector<VerificationTask>& tasks,
                                     const PromptSet& ps, const PipelineConfig& cfg,
                                     Backend& backend, ProblemTrace* trace) {
  std::vector<ProbeOutcome> outcomes;
  for (const auto& task : tasks) {
    if ((task.mode == VerificationMode::CMV && ps.kind != PromptKind::CMV) ||
        (task.mode == VerificationMode::TFV && ps.kind != PromptKind::TFV))
      throw KindMismatchError("probe prompt set kind does not match task mode");

    GenerationRequest req;
    req.prompt = task.mode == VerificationMode::CMV ? render_cmv(ps, task.prompt_body)
                                                    : render_tfv(ps, task.prompt_body);
    req.n = cfg.P;
    req.max_tokens = cfg.max_tokens;
    req.temperature = cfg.temperature;
    req.stop = cfg.stop;
    req.seed = mix_seed({cfg.seed, fnv1a64(req.prompt), kStageProbe,
                         uint64_t(task.candidate_index), uint64_t(task.variant_index)});

    std::vector<std::string> completions;
    bool failed = false;
    try {
      GenerationResponse resp = backend.generate(req);
      log_call(trace, "probe", cfg.P, resp.cached);
      completions = std::move(resp.completions);
    } catch (const ReplayMissError&) {
      throw;
    } catch (const AuthError&) {
      throw;
    } catch (const Error&) {
      failed = true;  // this task's probes count as unmatched
    }

    for (int p = 0; p < cfg.P; ++p) {
      ProbeOutcome outcome;
      outcome.candidate_index = task.candidate_index;
      outcome.variant_index = task.variant_index;
      outcome.probe_index = p;
      if (!failed && p < int(completions.size())) {
        outcome.raw_completion = completions[size_t(p)];
        if (task.mode == VerificationMode::CMV) {
          CleansingOutcome c = clean_number(outcome.raw_completion);
          outcome.extracted = c.answer;
          outcome.matched = c.answer && task.expected &&
                            answers_equal(*c.answer, Answer::of_number(*task.expected));
        } else {
          CleansingOutcome c = clean_true_false(outcome.raw_completion, cfg.strict_appendix);
          outcome.extracted = c.answer;
          outcome.matched = c.answer && answers_equal(*c.answer, Answer::of_true_false(true));
        }
      }
      outcomes.push_back(std::move(outcome));
    }
  }
  if (trace)
    trace->probes.insert(trace->probes.end(), outcomes.begin(), outcomes.end());
  return outcomes;
}

VerificationScore score_candidate(int candidate_index, const std::vector<ProbeOutcome>& outcomes,
                                  VerificationMode /*mode*/) {
  VerificationScore vs;
  vs.candidate_index = candidate_index;
  int max_variant = -1;
  for (const auto& o : outcomes)
    if (o.candidate_index == candidate_index) max_variant = std::max(max_variant, o.variant_index);
  vs.per_variant.assign(size_t(max_variant + 1), 0);
  for (const auto& o : outcomes) {
    if (o.candidate_index != candidate_index || !o.matched) continue;
    ++vs.per_variant[size_t(o.variant_index)];
    ++vs.total;
  }
  return vs;
}

int select_index(const std::vector<Candidate>& candidates,
                 const std::vector<VerificationScore>& scores) {
  if (candidates.empty()) throw EmptyInputError("select: no candidates");
  if (scores.size() != candidates.size())
    throw LengthMismatchError("select: " + std::to_string(candidates.size()) + " candidates vs " +
                              std::to_string(scores.size()) + " scores");
  int best = 0;
  for (int i = 1; i < int(candidates.size()); ++i) {
    const auto& a = candidates[size_t(i)];
    const auto& b = candidates[size_t(best)];
    int sa = scores[size_t(i)].total, sb = scores[size_t(best)].total;
    if (sa > sb ||
        (sa == sb && (a.forward_count > b.forward_count ||
                      (a.forward_count == b.forward_count &&
                       a.first_sample_index < b.first_sample_index))))
      best = i;
  }
  return best;
}

Answer select(const std::vector<Candidate>& candidates,
              const std::vector<VerificationScore>& scores) {
  return candidates[size_t(select_index(candidates, scores))].answer;
}

PipelineResult run_problem(const Problem& problem, const PromptLibrary& prompts,
                           PromptFamily family, const PipelineConfig& cfg, Backend& backend) {
  PipelineResult result;
  ProblemTrace& trace = result.trace;
  trace.problem_id = problem.id;
  trace.gold = problem.gold;

  const PromptSet& forward_ps = prompts.require(family, PromptKind::Forward);
  std::vector<Candidate> candidates = forward_reason(problem, forward_ps, cfg, backend, &trace);

  std::vector<VerificationTask> tasks;
  VerificationMode effective_mode = cfg.mode;
  std::vector<Conclusion> conclusions;
  for (int i = 0; i < int(candidates.size()); ++i)
    conclusions.push_back(
        rewrite_conclusion(problem, candidates[size_t(i)], i, cfg, backend, &trace));

  if (cfg.mode == VerificationMode::CMV) {
    try {
      for (const auto& conclusion : conclusions) {
        auto variant_tasks = mask_variants(problem, conclusion);
        tasks.insert(tasks.end(), variant_tasks.begin(), variant_tasks.end());
      }
    } catch (const NoMaskableTokensError&) {
      // Nothing to mask (common for commonsense problems): judge the whole
      // statement instead.
      effective_mode = VerificationMode::TFV;
      trace.fell_back_to_tfv = true;
      tasks.clear();
    }
  }
  if (effective_mode == VerificationMode::TFV && tasks.empty())
    for (const auto& conclusion : conclusions) tasks.push_back(tfv_task(problem, conclusion));
  trace.tasks = tasks;

  const PromptSet& probe_ps = prompts.require(
      family, effective_mode == VerificationMode::CMV ? PromptKind::CMV : PromptKind::TFV);
  std::vector<ProbeOutcome> outcomes = run_probes(tasks, probe_ps, cfg, backend, &trace);

  std::vector<VerificationScore> scores;
  for (int i = 0; i < int(candidates.size()); ++i)
    scores.push_back(score_candidate(i, outcomes, effective_mode));
  trace.scores = scores;

  result.selected = select(candidates, scores);
  trace.selected = result.selected;
  if (problem.gold) trace.correct = answers_equal(result.selected, *problem.gold);
  return result;
}

}  // namespace selfverify
