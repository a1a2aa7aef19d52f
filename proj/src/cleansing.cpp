#include "selfverify/cleansing.hpp"

#include <cctype>
#include <cstdlib>
#include <vector>

namespace selfverify {

namespace {

constexpr const char* kAnchor = "the answer is";
constexpr size_t kAnchorLen = 13;

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::pair<size_t, bool> answer_region_offset(const std::string& completion) {
  std::string low = lower_copy(completion);
  size_t pos = low.rfind(kAnchor);
  if (pos == std::string::npos) return {0, false};
  return {pos + kAnchorLen, true};
}

CleansingOutcome clean_number(const std::string& completion) {
  CleansingOutcome out;
  auto [offset, anchored] = answer_region_offset(completion);
  out.anchor_used = anchored;

  // Mirror of the reference extraction: strip every comma, then take the
  // first match of -?\d+\.?\d* (optional sign, digits, optional dot, more
  // digits; a trailing bare dot is part of the match). We keep an index map
  // so the span points back into the unstripped completion.
  std::string stripped;
  std::vector<size_t> orig;  // stripped index -> completion index
  stripped.reserve(completion.size() - offset);
  for (size_t i = offset; i < completion.size(); ++i) {
    if (completion[i] == ',') continue;
    stripped += completion[i];
    orig.push_back(i);
  }

  for (size_t i = 0; i < stripped.size(); ++i) {
    size_t j = i;
    if (stripped[j] == '-') ++j;
    size_t digits_start = j;
    while (j < stripped.size() && is_digit(stripped[j])) ++j;
    if (j == digits_start) continue;  // no digits here, try next start
    if (j < stripped.size() && stripped[j] == '.') {
      ++j;
      while (j < stripped.size() && is_digit(stripped[j])) ++j;
    }
    std::string literal = stripped.substr(i, j - i);
    out.answer = Answer::of_number(std::strtod(literal.c_str(), nullptr));
    out.matched_span = {orig[i], orig[j - 1] + 1};
    return out;
  }
  return out;
}

CleansingOutcome clean_choice(const std::string& completion) {
  CleansingOutcome out;
  auto [offset, anchored] = answer_region_offset(completion);
  out.anchor_used = anchored;
  for (size_t i = offset; i < completion.size(); ++i) {
    char up = char(std::toupper(static_cast<unsigned char>(completion[i])));
    if (up >= 'A' && up <= 'E') {
      out.answer = Answer::of_choice(up);
      out.matched_span = {i, i + 1};
      return out;
    }
  }
  return out;
}

namespace {

// Shared tokenizer for true/false and yes/no: lowercase, then replace
// " ' \n . : , and all whitespace with single spaces (1:1, so byte positions
// survive), split on ' ', and return the first token found in the two-member
// set. '?', '!', ';' are deliberately not separators; "true!" is no match.
CleansingOutcome clean_two_way(const std::string& completion, const char* member_a,
                               const char* member_b, bool truth_of_a,
                               Answer (*make)(bool)) {
  CleansingOutcome out;
  auto [offset, anchored] = answer_region_offset(completion);
  out.anchor_used = anchored;

  std::string region = lower_copy(completion.substr(offset));
  for (char& c : region) {
    if (c == '"' || c == '\'' || c == '.' || c == ':' || c == ',' ||
        std::isspace(static_cast<unsigned char>(c)))
      c = ' ';
  }

  size_t i = 0;
  while (i <= region.size()) {
    size_t end = region.find(' ', i);
    if (end == std::string::npos) end = region.size();
    std::string token = region.substr(i, end - i);
    if (token == member_a || token == member_b) {
      out.answer = make(token == member_a ? truth_of_a : !truth_of_a);
      out.matched_span = {offset + i, offset + end};
      return out;
    }
    if (end == region.size()) break;
    i = end + 1;
  }
  return out;
}

}  // namespace

CleansingOutcome clean_true_false(const std::string& completion, bool strict_appendix) {
  if (strict_appendix) {
    // The original script lowercases the text and then tests membership in
    // capitalized ("True", "False") — which can never match. Preserved
    // behind this flag so the historical behavior stays reproducible.
    CleansingOutcome out;
    out.anchor_used = answer_region_offset(completion).second;
    return out;
  }
  return clean_two_way(completion, "true", "false", true, &Answer::of_true_false);
}

CleansingOutcome clean_yes_no(const std::string& completion) {
  return clean_two_way(completion, "yes", "no", true, &Answer::of_yes_no);
}

CleansingOutcome clean_free(const std::string& completion) {
  CleansingOutcome out;
  auto [offset, anchored] = answer_region_offset(completion);
  out.anchor_used = anchored;

  std::string region = completion.substr(offset);
  // Quotes vanish, newlines act as spaces, then trim and drop the trailing
  // period(s) a sentence-shaped completion ends with.
  std::string kept;
  std::vector<size_t> orig;
  for (size_t i = 0; i < region.size(); ++i) {
    char c = region[i];
    if (c == '"' || c == '\'') continue;
    kept += (c == '\n' || c == '\r') ? ' ' : c;
    orig.push_back(offset + i);
  }
  size_t b = 0, e = kept.size();
  while (b < e && std::isspace(static_cast<unsigned char>(kept[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(kept[e - 1]))) --e;
  while (e > b && kept[e - 1] == '.') --e;
  while (e > b && std::isspace(static_cast<unsigned char>(kept[e - 1]))) --e;
  if (b >= e) return out;

  std::string text = kept.substr(b, e - b);
  out.matched_span = {orig[b], orig[e - 1] + 1};

  // M/D/YYYY (one- or two-digit month/day) upgrades to a Date answer.
  size_t p = 0;
  auto digits = [&](size_t lo, size_t hi) {
    size_t n = 0;
    while (p < text.size() && is_digit(text[p]) && n < hi) ++p, ++n;
    return n >= lo && n <= hi;
  };
  bool date_shape = digits(1, 2) && p < text.size() && text[p] == '/' && (++p, digits(1, 2)) &&
                    p < text.size() && text[p] == '/' && (++p, digits(4, 4)) && p == text.size();
  out.answer = date_shape ? Answer::of_date(text) : Answer::of_free(text);
  return out;
}

CleansingOutcome clean_for_format(AnswerFormat format, const std::string& completion,
                                  bool strict_appendix) {
  switch (format) {
    case AnswerFormat::Number: return clean_number(completion);
    case AnswerFormat::MultipleChoice: return clean_choice(completion);
    case AnswerFormat::TrueFalse: return clean_true_false(completion, strict_appendix);
    case AnswerFormat::YesNo: return clean_yes_no(completion);
    case AnswerFormat::Date:
    case AnswerFormat::Free: return clean_free(completion);
  }
  return {};
}

}  // namespace selfverify
