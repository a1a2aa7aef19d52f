#include "selfverify/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "selfverify/errors.hpp"

namespace selfverify {

const char* to_string(AnswerFormat f) {
  switch (f) {
    case AnswerFormat::Number: return "number";
    case AnswerFormat::MultipleChoice: return "multiple_choice";
    case AnswerFormat::TrueFalse: return "true_false";
    case AnswerFormat::YesNo: return "yes_no";
    case AnswerFormat::Date: return "date";
    case AnswerFormat::Free: return "free";
  }
  return "?";
}

AnswerFormat answer_format_from_string(const std::string& s) {
  if (s == "number") return AnswerFormat::Number;
  if (s == "multiple_choice" || s == "choice") return AnswerFormat::MultipleChoice;
  if (s == "true_false") return AnswerFormat::TrueFalse;
  if (s == "yes_no") return AnswerFormat::YesNo;
  if (s == "date") return AnswerFormat::Date;
  if (s == "free") return AnswerFormat::Free;
  throw ParseError("unknown answer format: " + s);
}

const char* to_string(Answer::Kind k) {
  switch (k) {
    case Answer::Kind::Number: return "number";
    case Answer::Kind::Choice: return "choice";
    case Answer::Kind::TrueFalse: return "true_false";
    case Answer::Kind::YesNo: return "yes_no";
    case Answer::Kind::Date: return "date";
    case Answer::Kind::Free: return "free";
  }
  return "?";
}

Answer Answer::of_number(double v) {
  Answer a;
  a.kind = Kind::Number;
  a.number = v;
  return a;
}

Answer Answer::of_choice(char letter) {
  Answer a;
  a.kind = Kind::Choice;
  a.letter = char(std::toupper(static_cast<unsigned char>(letter)));
  return a;
}

Answer Answer::of_true_false(bool v) {
  Answer a;
  a.kind = Kind::TrueFalse;
  a.truth = v;
  return a;
}

Answer Answer::of_yes_no(bool v) {
  Answer a;
  a.kind = Kind::YesNo;
  a.truth = v;
  return a;
}

Answer Answer::of_date(std::string text) {
  Answer a;
  a.kind = Kind::Date;
  a.text = std::move(text);
  return a;
}

Answer Answer::of_free(std::string text) {
  Answer a;
  a.kind = Kind::Free;
  a.text = std::move(text);
  return a;
}

std::string format_double_shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string Answer::surface() const {
  switch (kind) {
    case Kind::Number: return format_double_shortest(number);
    case Kind::Choice: return std::string(1, letter);
    case Kind::TrueFalse: return truth ? "True" : "False";
    case Kind::YesNo: return truth ? "Yes" : "No";
    case Kind::Date: return text;
    case Kind::Free: return text;
  }
  return {};
}

namespace {

bool numbers_close(double a, double b) {
  if (a == b) return true;  // covers infinities of the same sign
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  double diff = std::fabs(a - b);
  double scale = std::max(std::fabs(a), std::fabs(b));
  return diff <= std::max(1e-9, 1e-6 * scale);  // absolute floor near zero
}

// "4/19/1969" -> (4, 19, 1969); nullopt when the shape is off.
std::optional<std::array<int, 3>> parse_date_fields(const std::string& s) {
  std::array<int, 3> out{};
  size_t pos = 0;
  for (int field = 0; field < 3; ++field) {
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) return std::nullopt;
    out[size_t(field)] = std::atoi(s.substr(start, pos - start).c_str());
    if (field < 2) {
      if (pos >= s.size() || s[pos] != '/') return std::nullopt;
      ++pos;
    }
  }
  if (pos != s.size()) return std::nullopt;
  return out;
}

}  // namespace

bool answers_equal(const Answer& a, const Answer& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Answer::Kind::Number:
      return numbers_close(a.number, b.number);
    case Answer::Kind::Choice:
      return a.letter == b.letter;
    case Answer::Kind::TrueFalse:
    case Answer::Kind::YesNo:
      return a.truth == b.truth;
    case Answer::Kind::Date: {
      auto fa = parse_date_fields(trim_copy(a.text));
      auto fb = parse_date_fields(trim_copy(b.text));
      if (fa && fb) return *fa == *fb;  // zero-padding washes out here
      return trim_copy(a.text) == trim_copy(b.text);
    }
    case Answer::Kind::Free:
      return lower_copy(collapse_ws(a.text)) == lower_copy(collapse_ws(b.text));
  }
  return false;
}

std::string trim_copy(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string collapse_ws(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_ws = true;  // true at start so leading whitespace is dropped
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_ws) out += ' ';
      in_ws = true;
    } else {
      out += c;
      in_ws = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string lower_copy(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

std::vector<NumericToken> scan_numeric_tokens(const std::string& text) {
  std::vector<NumericToken> tokens;
  size_t i = 0;
  auto digit = [&](size_t k) {
    return k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]));
  };
  while (i < text.size()) {
    if (!digit(i)) {
      ++i;
      continue;
    }
    size_t start = i;
    while (digit(i)) ++i;
    // Comma groups: accept ",ddd" runs only when exactly three digits follow
    // (so "9, 10" stays two tokens but "1,234,567" is one).
    while (i < text.size() && text[i] == ',' && digit(i + 1) && digit(i + 2) && digit(i + 3) &&
           !digit(i + 4)) {
      i += 4;
    }
    // Decimal part: '.' only counts when a digit follows (a bare '.' is a
    // sentence terminal).
    if (i < text.size() && text[i] == '.' && digit(i + 1)) {
      ++i;
      while (digit(i)) ++i;
    }
    NumericToken tok;
    tok.begin = start;
    tok.end = i;
    tok.literal = text.substr(start, i - start);
    std::string stripped;
    for (char c : tok.literal)
      if (c != ',') stripped += c;
    tok.value = std::strtod(stripped.c_str(), nullptr);
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

namespace {

// Sentence boundaries: runs of . ? ! where '.' flanked by digits is part of a
// decimal number. Returns trimmed sentences in order.
std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> sentences;
  std::string cur;
  size_t i = 0;
  auto digit = [&](size_t k) {
    return k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]));
  };
  auto flush = [&]() {
    std::string t = trim_copy(cur);
    if (!t.empty()) sentences.push_back(std::move(t));
    cur.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '.' && i > 0 && digit(i - 1) && digit(i + 1)) {
      cur += c;  // decimal point, not a boundary
      ++i;
      continue;
    }
    if (c == '.' || c == '?' || c == '!') {
      // Consume the whole terminal run ("?!", "...") into this sentence.
      while (i < text.size() && (text[i] == '.' || text[i] == '?' || text[i] == '!')) {
        cur += text[i];
        ++i;
      }
      flush();
      continue;
    }
    cur += c;
    ++i;
  }
  flush();
  return sentences;
}

}  // namespace

std::pair<std::vector<Condition>, std::string> split_conditions(const std::string& raw_text) {
  if (trim_copy(raw_text).empty()) throw EmptyInputError("split_conditions: blank problem text");
  std::vector<std::string> sentences = split_sentences(raw_text);
  // sentences is non-empty here: the text has at least one non-space char.

  // The question starts at the first sentence of the last contiguous run of
  // '?'-sentences and extends to the end (trailing statements like answer
  // choices ride along). Without any '?', the last sentence is the question.
  size_t q_start = sentences.size() - 1;
  std::ptrdiff_t last_q = -1;
  for (size_t k = 0; k < sentences.size(); ++k)
    if (sentences[k].find('?') != std::string::npos) last_q = std::ptrdiff_t(k);
  if (last_q >= 0) {
    size_t j = size_t(last_q);
    while (j > 0 && sentences[j - 1].find('?') != std::string::npos) --j;
    q_start = j;
  }

  std::vector<Condition> conditions;
  for (size_t k = 0; k < q_start; ++k) {
    Condition c;
    c.text = sentences[k];
    c.numeric_tokens = scan_numeric_tokens(c.text);
    conditions.push_back(std::move(c));
  }
  std::string question;
  for (size_t k = q_start; k < sentences.size(); ++k) {
    if (!question.empty()) question += ' ';
    question += sentences[k];
  }
  return {std::move(conditions), std::move(question)};
}

Problem make_problem(std::string id, std::string raw_text, AnswerFormat format,
                     std::optional<Answer> gold) {
  Problem p;
  p.id = std::move(id);
  p.raw_text = std::move(raw_text);
  p.format = format;
  p.gold = std::move(gold);
  auto [conds, q] = split_conditions(p.raw_text);
  p.conditions = std::move(conds);
  p.question = std::move(q);
  return p;
}

}  // namespace selfverify
