#include "selfverify/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "selfverify/errors.hpp"

namespace selfverify {

using nlohmann::json;

const char* to_string(Method m) {
  switch (m) {
    case Method::CoT: return "cot";
    case Method::SC: return "sc";
    case Method::SV: return "sv";
    case Method::SC2SV: return "sc2+sv";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "cot") return Method::CoT;
  if (s == "sc") return Method::SC;
  if (s == "sv") return Method::SV;
  if (s == "sc2+sv" || s == "sc2sv") return Method::SC2SV;
  throw ParseError("unknown method: " + s);
}

double solve_rate(const std::vector<std::optional<Answer>>& predictions,
                  const std::vector<Answer>& gold, std::vector<std::string>* warnings) {
  if (predictions.size() != gold.size())
    throw LengthMismatchError("solve_rate: " + std::to_string(predictions.size()) +
                              " predictions vs " + std::to_string(gold.size()) + " gold answers");
  if (predictions.empty()) {
    if (warnings) warnings->push_back("solve_rate over an empty run");
    return 0.0;
  }
  size_t correct = 0;
  for (size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] && answers_equal(*predictions[i], gold[i])) ++correct;
  return 100.0 * double(correct) / double(predictions.size());
}

int majority_index(const std::vector<Candidate>& candidates) {
  if (candidates.empty()) throw EmptyInputError("majority_index: no candidates");
  int best = 0;
  for (int i = 1; i < int(candidates.size()); ++i) {
    const auto& a = candidates[size_t(i)];
    const auto& b = candidates[size_t(best)];
    if (a.forward_count > b.forward_count ||
        (a.forward_count == b.forward_count && a.first_sample_index < b.first_sample_index))
      best = i;
  }
  return best;
}

std::vector<int> top_two_candidates(const std::vector<Candidate>& candidates) {
  std::vector<int> order(candidates.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    const auto& a = candidates[size_t(x)];
    const auto& b = candidates[size_t(y)];
    if (a.forward_count != b.forward_count) return a.forward_count > b.forward_count;
    return a.first_sample_index < b.first_sample_index;
  });
  if (order.size() > 2) order.resize(2);
  return order;
}

namespace {

// One problem under one method. Any per-problem failure lands in
// trace.error and the problem scores as wrong; replay misses and auth
// errors propagate and abort the run.
ProblemTrace solve_one(Method method, const Problem& problem, const PromptLibrary& prompts,
                       PromptFamily family, const PipelineConfig& cfg, Backend& backend) {
  ProblemTrace trace;
  trace.problem_id = problem.id;
  trace.gold = problem.gold;
  try {
    switch (method) {
      case Method::CoT: {
        PipelineConfig greedy = cfg;
        greedy.K = 1;
        greedy.temperature = 0.0;
        const PromptSet& forward_ps = prompts.require(family, PromptKind::Forward);
        auto candidates = forward_reason(problem, forward_ps, greedy, backend, &trace);
        trace.selected = candidates.at(0).answer;
        break;
      }
      case Method::SC: {
        const PromptSet& forward_ps = prompts.require(family, PromptKind::Forward);
        auto candidates = forward_reason(problem, forward_ps, cfg, backend, &trace);
        trace.selected = candidates[size_t(majority_index(candidates))].answer;
        break;
      }
      case Method::SV: {
        PipelineResult result = run_problem(problem, prompts, family, cfg, backend);
        return result.trace;
      }
      case Method::SC2SV: {
        const PromptSet& forward_ps = prompts.require(family, PromptKind::Forward);
        auto candidates = forward_reason(problem, forward_ps, cfg, backend, &trace);
        auto keep = top_two_candidates(candidates);
        if (keep.size() < 2) {  // a single distinct answer needs no verification
          trace.selected = candidates.at(0).answer;
          break;
        }
        std::vector<Candidate> pair = {candidates[size_t(keep[0])], candidates[size_t(keep[1])]};
        trace.candidates = pair;

        std::vector<Conclusion> conclusions;
        for (int i = 0; i < int(pair.size()); ++i)
          conclusions.push_back(rewrite_conclusion(problem, pair[size_t(i)], i, cfg, backend, &trace));

        std::vector<VerificationTask> tasks;
        VerificationMode effective = cfg.mode;
        if (cfg.mode == VerificationMode::CMV) {
          try {
            for (const auto& conclusion : conclusions) {
              auto vt = mask_variants(problem, conclusion);
              tasks.insert(tasks.end(), vt.begin(), vt.end());
            }
          } catch (const NoMaskableTokensError&) {
            effective = VerificationMode::TFV;
            trace.fell_back_to_tfv = true;
            tasks.clear();
          }
        }
        if (effective == VerificationMode::TFV && tasks.empty())
          for (const auto& conclusion : conclusions) tasks.push_back(tfv_task(problem, conclusion));
        trace.tasks = tasks;

        const PromptSet& probe_ps = prompts.require(
            family, effective == VerificationMode::CMV ? PromptKind::CMV : PromptKind::TFV);
        auto outcomes = run_probes(tasks, probe_ps, cfg, backend, &trace);
        std::vector<VerificationScore> scores;
        for (int i = 0; i < int(pair.size()); ++i)
          scores.push_back(score_candidate(i, outcomes, effective));
        trace.scores = scores;
        trace.selected = select(pair, scores);
        break;
      }
    }
  } catch (const ReplayMissError&) {
    throw;
  } catch (const AuthError&) {
    throw;
  } catch (const Error& e) {
    trace.error = e.what();
  }
  if (trace.selected && problem.gold)
    trace.correct = answers_equal(*trace.selected, *problem.gold);
  else if (problem.gold)
    trace.correct = false;
  return trace;
}

MethodRun run_repeated(Method method, const std::vector<Problem>& problems,
                       const PromptLibrary& prompts, PromptFamily family,
                       const PipelineConfig& cfg, Backend& backend, std::ostream* trace_out) {
  MethodRun run;
  run.method = method;

  for (int r = 0; r < cfg.repeats; ++r) {
    PipelineConfig repeat_cfg = cfg;
    repeat_cfg.seed = cfg.seed + uint64_t(r);

    std::vector<std::optional<ProblemTrace>> traces(problems.size());
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;

    int workers = std::max(1, std::min(cfg.concurrency, int(problems.size())));
    auto work = [&]() {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= problems.size()) return;
        {
          std::lock_guard<std::mutex> lock(error_mu);
          if (first_error) return;  // stop picking up new problems
        }
        try {
          traces[i] = solve_one(method, problems[i], prompts, family, repeat_cfg, backend);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    // Flush whatever finished, in order, before propagating a fatal error —
    // partial traces are better than none when a replay run dies.
    std::vector<std::optional<Answer>> predictions;
    std::vector<Answer> gold;
    for (size_t i = 0; i < problems.size(); ++i) {
      if (!traces[i]) continue;
      traces[i]->repeat = r;
      if (trace_out) *trace_out << trace_to_json(*traces[i], method) << "\n";
      predictions.push_back(traces[i]->selected);
      gold.push_back(problems[i].gold.value_or(Answer::of_free("")));
    }
    if (first_error) std::rethrow_exception(first_error);

    run.per_repeat.push_back(solve_rate(predictions, gold));
  }

  double sum = 0;
  for (double r : run.per_repeat) sum += r;
  run.mean = run.per_repeat.empty() ? 0.0 : sum / double(run.per_repeat.size());
  return run;
}

}  // namespace

MethodRun run_greedy_cot(const std::vector<Problem>& problems, const PromptLibrary& prompts,
                         PromptFamily family, const PipelineConfig& cfg, Backend& backend,
                         std::ostream* trace_out) {
  return run_repeated(Method::CoT, problems, prompts, family, cfg, backend, trace_out);
}

MethodRun run_self_consistency(const std::vector<Problem>& problems, const PromptLibrary& prompts,
                               PromptFamily family, const PipelineConfig& cfg, Backend& backend,
                               std::ostream* trace_out) {
  return run_repeated(Method::SC, problems, prompts, family, cfg, backend, trace_out);
}

MethodRun run_sv(const std::vector<Problem>& problems, const PromptLibrary& prompts,
                 PromptFamily family, const PipelineConfig& cfg, Backend& backend,
                 std::ostream* trace_out) {
  return run_repeated(Method::SV, problems, prompts, family, cfg, backend, trace_out);
}

MethodRun run_sc_top2_sv(const std::vector<Problem>& problems, const PromptLibrary& prompts,
                         PromptFamily family, const PipelineConfig& cfg, Backend& backend,
                         std::ostream* trace_out) {
  return run_repeated(Method::SC2SV, problems, prompts, family, cfg, backend, trace_out);
}

MethodRun run_method(Method method, const std::vector<Problem>& problems,
                     const PromptLibrary& prompts, PromptFamily family, const PipelineConfig& cfg,
                     Backend& backend, std::ostream* trace_out) {
  return run_repeated(method, problems, prompts, family, cfg, backend, trace_out);
}

namespace {

json answer_to_json(const Answer& a) {
  json j;
  j["kind"] = to_string(a.kind);
  switch (a.kind) {
    case Answer::Kind::Number: j["value"] = a.number; break;
    case Answer::Kind::Choice: j["value"] = std::string(1, a.letter); break;
    case Answer::Kind::TrueFalse:
    case Answer::Kind::YesNo: j["value"] = a.truth; break;
    case Answer::Kind::Date:
    case Answer::Kind::Free: j["value"] = a.text; break;
  }
  return j;
}

}  // namespace

std::string trace_to_json(const ProblemTrace& trace, Method method) {
  json j;
  j["method"] = to_string(method);
  j["repeat"] = trace.repeat;
  j["problem"] = trace.problem_id;
  j["candidates"] = json::array();
  for (const auto& c : trace.candidates) {
    json jc;
    jc["answer"] = answer_to_json(c.answer);
    jc["count"] = c.forward_count;
    jc["first_sample"] = c.first_sample_index;
    jc["cot_texts"] = c.cot_texts;
    j["candidates"].push_back(std::move(jc));
  }
  j["conclusions"] = json::array();
  for (const auto& c : trace.conclusions) {
    json jc;
    jc["candidate"] = c.candidate_index;
    jc["text"] = c.text;
    jc["from_template"] = c.from_template;
    j["conclusions"].push_back(std::move(jc));
  }
  j["tasks"] = json::array();
  for (const auto& t : trace.tasks) {
    json jt;
    jt["mode"] = to_string(t.mode);
    jt["candidate"] = t.candidate_index;
    jt["variant"] = t.variant_index;
    jt["body"] = t.prompt_body;
    if (t.expected) jt["expected"] = *t.expected;
    j["tasks"].push_back(std::move(jt));
  }
  j["probes"] = json::array();
  for (const auto& p : trace.probes) {
    json jp;
    jp["candidate"] = p.candidate_index;
    jp["variant"] = p.variant_index;
    jp["p"] = p.probe_index;
    jp["completion"] = p.raw_completion;
    if (p.extracted) jp["extracted"] = answer_to_json(*p.extracted);
    jp["matched"] = p.matched;
    j["probes"].push_back(std::move(jp));
  }
  j["scores"] = json::array();
  for (const auto& s : trace.scores) {
    json js;
    js["candidate"] = s.candidate_index;
    js["per_variant"] = s.per_variant;
    js["total"] = s.total;
    j["scores"].push_back(std::move(js));
  }
  if (trace.selected) j["selected"] = answer_to_json(*trace.selected);
  if (trace.gold) j["gold"] = answer_to_json(*trace.gold);
  if (trace.correct) j["correct"] = *trace.correct;
  j["fallback_tfv"] = trace.fell_back_to_tfv;
  j["calls"] = json::array();
  for (const auto& c : trace.calls) {
    json jc;
    jc["stage"] = c.stage;
    jc["n"] = c.n;
    jc["cached"] = c.cached;
    j["calls"].push_back(std::move(jc));
  }
  if (!trace.error.empty()) j["error"] = trace.error;
  return j.dump();
}

std::string format_report_table(const std::vector<RunReport>& reports) {
  std::vector<std::string> methods;
  for (const auto& rep : reports)
    for (const auto& m : rep.methods) {
      std::string name = to_string(m.method);
      if (std::find(methods.begin(), methods.end(), name) == methods.end())
        methods.push_back(name);
    }

  size_t method_w = 6;  // "method"
  for (const auto& m : methods) method_w = std::max(method_w, m.size());

  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-*s", int(method_w), "method");
  out += buf;
  std::vector<size_t> col_w;
  for (const auto& rep : reports) {
    size_t w = std::max<size_t>(rep.dataset.size(), 6);
    col_w.push_back(w);
    std::snprintf(buf, sizeof buf, "  %*s", int(w), rep.dataset.c_str());
    out += buf;
  }
  out += "\n";
  for (const auto& name : methods) {
    std::snprintf(buf, sizeof buf, "%-*s", int(method_w), name.c_str());
    out += buf;
    for (size_t d = 0; d < reports.size(); ++d) {
      const MethodRun* found = nullptr;
      for (const auto& m : reports[d].methods)
        if (to_string(m.method) == name) found = &m;
      if (found) {
        std::snprintf(buf, sizeof buf, "  %*.2f", int(col_w[d]), found->mean);
        out += buf;
      } else {
        std::snprintf(buf, sizeof buf, "  %*s", int(col_w[d]), "-");
        out += buf;
      }
    }
    out += "\n";
  }
  return out;
}

std::string format_report_csv(const std::vector<RunReport>& reports) {
  std::string out = "dataset,method,repeat,solve_rate\n";
  char buf[128];
  for (const auto& rep : reports)
    for (const auto& m : rep.methods)
      for (size_t r = 0; r < m.per_repeat.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%s,%s,%zu,%.4f\n", rep.dataset.c_str(),
                      to_string(m.method), r, m.per_repeat[r]);
        out += buf;
      }
  return out;
}

}  // namespace selfverify
