#pragma once

// Core data model: problems split into conditions + question, numeric tokens
// with byte spans, and the tagged Answer type every other module traffics in.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace selfverify {

enum class AnswerFormat { Number, MultipleChoice, TrueFalse, YesNo, Date, Free };

const char* to_string(AnswerFormat f);
AnswerFormat answer_format_from_string(const std::string& s);

// Tagged answer value. Construct through the factories so invariants hold
// (choice letters are uppercased, date keeps its original text).
struct Answer {
  enum class Kind { Number, Choice, TrueFalse, YesNo, Date, Free };
  Kind kind = Kind::Free;
  double number = 0.0;     // Kind::Number
  char letter = 0;         // Kind::Choice, 'A'..'E'
  bool truth = false;      // Kind::TrueFalse / Kind::YesNo
  std::string text;        // Kind::Date (M/D/YYYY-ish) / Kind::Free

  static Answer of_number(double v);
  static Answer of_choice(char letter);
  static Answer of_true_false(bool v);
  static Answer of_yes_no(bool v);
  static Answer of_date(std::string text);
  static Answer of_free(std::string text);

  // How the answer appears inside prompt text ("18", "B", "True", "Yes",
  // "04/19/1969", free text verbatim). Numbers use the shortest round-trip
  // decimal form.
  std::string surface() const;
};

const char* to_string(Answer::Kind k);

// Semantic equality: numbers within relative 1e-6 (absolute 1e-9 near zero),
// choices/booleans exact, dates field-wise after zero-padding, free text
// after whitespace/case normalization. Different kinds are never equal.
bool answers_equal(const Answer& a, const Answer& b);

// A number as it appeared in a condition sentence: exact surface text
// (possibly with commas), parsed value, and byte span within the condition.
struct NumericToken {
  std::string literal;
  double value = 0.0;
  size_t begin = 0;  // byte offsets into Condition::text, [begin, end)
  size_t end = 0;
};

struct Condition {
  std::string text;  // one sentence, trimmed
  std::vector<NumericToken> numeric_tokens;
};

struct Problem {
  std::string id;
  std::string raw_text;
  std::vector<Condition> conditions;
  std::string question;  // the trailing interrogative part
  AnswerFormat format = AnswerFormat::Number;
  std::optional<Answer> gold;
};

// One deduplicated forward answer together with its sampling stats.
struct Candidate {
  Answer answer;
  int forward_count = 0;       // how many of the K samples produced it
  int first_sample_index = 0;  // earliest sample that produced it
  std::vector<std::string> cot_texts;  // raw completions, in sample order
};

// Declarative restatement of question + candidate answer, fed to verification.
struct Conclusion {
  std::string text;
  int candidate_index = 0;
  bool from_template = false;  // true when the rewrite fell back to a template
};

// Splits raw problem text into condition sentences plus the trailing question
// and extracts numeric tokens per condition. Sentences end at . ? ! outside
// decimal numbers; the question is the suffix starting at the last run of
// '?'-sentences (so "How many? Answer Choices: ..." stays together). Throws
// EmptyInputError on blank input.
std::pair<std::vector<Condition>, std::string> split_conditions(const std::string& raw_text);

// Convenience: build a Problem (with conditions/question filled) from text.
Problem make_problem(std::string id, std::string raw_text, AnswerFormat format,
                     std::optional<Answer> gold = std::nullopt);

// Exposed for reuse by cleansing and tests: scan `text` for numeric literals
// (digits with optional 3-digit comma groups and optional decimal part).
std::vector<NumericToken> scan_numeric_tokens(const std::string& text);

// Whitespace helpers shared across the library.
std::string trim_copy(const std::string& s);
std::string collapse_ws(const std::string& s);  // runs of whitespace -> ' ', trimmed
std::string lower_copy(const std::string& s);

// Shortest decimal form that round-trips the double ("18", "3.5",
// "0.08333333333333334").
std::string format_double_shortest(double v);

}  // namespace selfverify
