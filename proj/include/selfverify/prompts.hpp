#pragma once

// Few-shot prompt sets and renderers. Fixtures live as editable text files
// under <prompt_dir>/<family>/<kind>.prompts (see kvfile.hpp for the format):
//
//   kind = "forward"
//   family = "math"
//
//   [[exemplar]]
//   question = """..."""
//   chain = """..."""
//   answer = "6"
//
// Rendering is byte-stable: exemplars become
//   "Q: {question}\nA: {chain} The answer is {answer}." + separator
// and the target block depends on the prompt kind (see the render_* ops).

#include <optional>
#include <string>
#include <vector>

#include "selfverify/core.hpp"

namespace selfverify {

enum class PromptKind { Forward, Rewrite, CMV, TFV };
enum class PromptFamily { MathWord, AQuA, CSQA, DateUnderstanding };

const char* to_string(PromptKind k);
const char* to_string(PromptFamily f);
PromptKind prompt_kind_from_string(const std::string& s);
PromptFamily prompt_family_from_string(const std::string& s);
// Directory name for a family under the prompt dir ("math", "aqua", ...).
const char* family_dir(PromptFamily f);

struct FewShotExemplar {
  std::string question;
  std::string chain;
  std::string answer;
  bool operator==(const FewShotExemplar&) const = default;
};

struct PromptSet {
  PromptKind kind = PromptKind::Forward;
  PromptFamily family = PromptFamily::MathWord;
  std::vector<FewShotExemplar> exemplars;

  // First `shots` exemplars (for shot-count sweeps). shots=0 gives a
  // zero-shot set.
  PromptSet truncated(size_t shots) const;
  bool operator==(const PromptSet&) const = default;
};

inline constexpr const char* kDefaultSeparator = "\n\n";

// Forward prompt: exemplars, then "Q: {raw_text}\nA:".
std::string render_forward(const PromptSet& ps, const Problem& problem,
                           const std::string& separator = kDefaultSeparator);

// Rewrite instruction (zero-shot): the bracketed question/answer template.
std::string render_rewrite(const std::string& question, const Answer& answer);

// CMV probe: exemplars, then "Q: \"{masked}\" What is the answer of 'X'?\nA:".
// Throws NoMaskError when the masked text contains no 'X'.
std::string render_cmv(const PromptSet& ps, const std::string& masked_text,
                       const std::string& separator = kDefaultSeparator);

// TFV probe: exemplars, then "Q: '{text}' Do it is correct (True or False)?\nA:".
std::string render_tfv(const PromptSet& ps, const std::string& statement,
                       const std::string& separator = kDefaultSeparator);

PromptSet load_prompt_file(const std::string& path);
void save_prompt_file(const PromptSet& ps, const std::string& path);

// All fixtures found under a prompt directory, addressed by (family, kind).
class PromptLibrary {
 public:
  static PromptLibrary load_dir(const std::string& dir);

  void add(PromptSet ps);
  const PromptSet* find(PromptFamily family, PromptKind kind) const;
  // Throws ConfigError naming the missing fixture.
  const PromptSet& require(PromptFamily family, PromptKind kind) const;
  size_t size() const { return sets_.size(); }

 private:
  std::vector<PromptSet> sets_;
};

}  // namespace selfverify
