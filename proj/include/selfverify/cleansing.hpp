#pragma once

// Answer cleansing: total functions that pull a structured Answer out of a
// raw model completion. Each op first anchors on the last occurrence of
// "the answer is" (case-insensitive; the whole completion is used when the
// phrase is absent), then applies a format-specific extraction:
//
//   number      remove commas, first match of -?\d+\.?\d*
//   choice      first A/B/C/D/E letter (case-insensitive) in the region
//   true/false  lowercase; replace " ' \n . : , and whitespace with spaces;
//               split; first token equal to true/false
//   yes/no      same tokenization, members yes/no
//   free        strip quotes and newlines, trim, drop trailing periods;
//               becomes Date when shaped like M/D/YYYY
//
// clean_true_false has a strict_appendix mode that reproduces a quirk of the
// original extraction script: the text is lowercased but membership is tested
// against capitalized "True"/"False", so nothing ever matches. Default mode
// implements the evident intent (case-insensitive match).
//
// These never throw; absence of an answer is reported, not raised.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "selfverify/core.hpp"

namespace selfverify {

struct CleansingOutcome {
  std::optional<Answer> answer;
  // Byte range in the original completion that produced the answer. Present
  // exactly when answer is present.
  std::optional<std::pair<size_t, size_t>> matched_span;
  bool anchor_used = false;  // true when "the answer is" was found
};

CleansingOutcome clean_number(const std::string& completion);
CleansingOutcome clean_choice(const std::string& completion);
CleansingOutcome clean_true_false(const std::string& completion, bool strict_appendix = false);
CleansingOutcome clean_yes_no(const std::string& completion);
CleansingOutcome clean_free(const std::string& completion);

// Dispatch on the problem's answer format.
CleansingOutcome clean_for_format(AnswerFormat format, const std::string& completion,
                                  bool strict_appendix = false);

// The anchoring rule by itself: byte offset where the answer region begins
// (just past the last case-insensitive "the answer is"), or 0 when absent.
std::pair<size_t, bool> answer_region_offset(const std::string& completion);

}  // namespace selfverify
