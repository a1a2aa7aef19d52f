#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "selfverify/core.hpp"
#include "selfverify/errors.hpp"

using namespace selfverify;

namespace {

std::vector<std::string> condition_texts(const Problem& p) {
  std::vector<std::string> out;
  for (const auto& c : p.conditions) out.push_back(c.text);
  return out;
}

std::vector<double> token_values(const std::string& text) {
  std::vector<double> out;
  for (const auto& t : scan_numeric_tokens(text)) out.push_back(t.value);
  return out;
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("numeric tokens: plain integers and spans") {
  const std::string text = "Jackie has 10 apples.";
  auto tokens = scan_numeric_tokens(text);
  REQUIRE(tokens.size() == 1);
  CHECK(tokens[0].literal == "10");
  CHECK(tokens[0].value == 10.0);
  CHECK(text.substr(tokens[0].begin, tokens[0].end - tokens[0].begin) == tokens[0].literal);
}

TEST_CASE("numeric tokens: comma grouping") {
  // Exactly-three-digit groups join; anything else splits.
  CHECK(token_values("1,234,567 things") == std::vector<double>{1234567});
  CHECK(token_values("lists 9, 10 and 11") == std::vector<double>{9, 10, 11});
  CHECK(token_values("1,2345") == std::vector<double>{1, 2345});
  CHECK(token_values("5,67") == std::vector<double>{5, 67});
  CHECK(token_values("12,345 rows") == std::vector<double>{12345});
  auto tokens = scan_numeric_tokens("paid 1,234 dollars");
  REQUIRE(tokens.size() == 1);
  CHECK(tokens[0].literal == "1,234");
}

TEST_CASE("numeric tokens: decimals need a digit after the dot") {
  CHECK(token_values("ran 3.5 miles") == std::vector<double>{3.5});
  CHECK(token_values("got 3. Then stopped") == std::vector<double>{3});
  auto tokens = scan_numeric_tokens("rate is 0.25.");
  REQUIRE(tokens.size() == 1);
  CHECK(tokens[0].literal == "0.25");
  // No sign handling here: conditions quote magnitudes, not arithmetic.
  CHECK(token_values("dropped -7 degrees") == std::vector<double>{7});
}

TEST_CASE("split_conditions: statements then a question") {
  auto [conds, question] = split_conditions(
      "Jackie has 10 apples. Adam has 8 apples. How many apples does Jackie have more than Adam?");
  REQUIRE(conds.size() == 2);
  CHECK(conds[0].text == "Jackie has 10 apples.");
  CHECK(conds[1].text == "Adam has 8 apples.");
  REQUIRE(conds[0].numeric_tokens.size() == 1);
  CHECK(conds[0].numeric_tokens[0].value == 10.0);
  REQUIRE(conds[1].numeric_tokens.size() == 1);
  CHECK(conds[1].numeric_tokens[0].value == 8.0);
  CHECK(question == "How many apples does Jackie have more than Adam?");
}

TEST_CASE("split_conditions: commas and dollar amounts stay inside one condition") {
  auto [conds, question] = split_conditions(
      "Dana worked 9 hours on Friday, 10 hours on Saturday, and 3 hours on Sunday. "
      "She earns $13 per hour. How much money did Dana earn in weekend?");
  REQUIRE(conds.size() == 2);
  CHECK(token_values(conds[0].text) == std::vector<double>{9, 10, 3});
  CHECK(token_values(conds[1].text) == std::vector<double>{13});
  CHECK(question == "How much money did Dana earn in weekend?");
}

TEST_CASE("split_conditions: trailing statements ride along with the question") {
  auto [conds, question] = split_conditions(
      "Sam went out. Where might he go? Answer Choices: (a) market (b) home.");
  REQUIRE(conds.size() == 1);
  CHECK(conds[0].text == "Sam went out.");
  CHECK(question == "Where might he go? Answer Choices: (a) market (b) home.");
}

TEST_CASE("split_conditions: a contiguous run of question sentences joins") {
  auto [conds, question] = split_conditions("Is it red? Is it blue? It is big.");
  CHECK(conds.empty());
  CHECK(question == "Is it red? Is it blue? It is big.");
}

TEST_CASE("split_conditions: only the last question run counts") {
  auto [conds, question] = split_conditions("What now? He ran. How far did he go?");
  REQUIRE(conds.size() == 2);
  CHECK(conds[0].text == "What now?");
  CHECK(conds[1].text == "He ran.");
  CHECK(question == "How far did he go?");
}

TEST_CASE("split_conditions: without a question mark the last sentence is the question") {
  auto [conds, question] = split_conditions("He has 3 apples. Count them.");
  REQUIRE(conds.size() == 1);
  CHECK(conds[0].text == "He has 3 apples.");
  CHECK(question == "Count them.");

  auto [conds2, question2] = split_conditions("Just one sentence here.");
  CHECK(conds2.empty());
  CHECK(question2 == "Just one sentence here.");
}

TEST_CASE("split_conditions: decimals do not end sentences") {
  auto [conds, question] = split_conditions("He ran 3.5 miles. How far did he run?");
  REQUIRE(conds.size() == 1);
  CHECK(conds[0].text == "He ran 3.5 miles.");
}

TEST_CASE("split_conditions: terminal runs and ellipses") {
  auto [conds, question] = split_conditions("Wait... How long did it take?");
  REQUIRE(conds.size() == 1);
  CHECK(conds[0].text == "Wait...");
  CHECK(question == "How long did it take?");

  auto [conds2, question2] = split_conditions("Really?! Go now.");
  CHECK(conds2.empty());
  CHECK(question2 == "Really?! Go now.");
}

TEST_CASE("split_conditions: blank input is an error") {
  CHECK_THROWS_AS(split_conditions(""), EmptyInputError);
  CHECK_THROWS_AS(split_conditions("   \n\t "), EmptyInputError);
}

TEST_CASE("make_problem fills the derived fields") {
  Problem p = make_problem("p1", "Tom has 4 pears. How many pears does Tom have?",
                           AnswerFormat::Number, Answer::of_number(4));
  CHECK(p.id == "p1");
  CHECK(p.format == AnswerFormat::Number);
  REQUIRE(p.gold.has_value());
  CHECK(p.gold->number == 4.0);
  CHECK(condition_texts(p) == std::vector<std::string>{"Tom has 4 pears."});
  CHECK(p.question == "How many pears does Tom have?");
}

TEST_CASE("answers_equal: numbers use a relative tolerance with an absolute floor") {
  CHECK(answers_equal(Answer::of_number(2), Answer::of_number(2.0)));
  CHECK(answers_equal(Answer::of_number(0.1 + 0.2), Answer::of_number(0.3)));
  CHECK(answers_equal(Answer::of_number(1.0), Answer::of_number(1.0 + 1e-10)));
  CHECK(answers_equal(Answer::of_number(1e12), Answer::of_number(1e12 + 1)));
  CHECK(!answers_equal(Answer::of_number(1.0), Answer::of_number(1.001)));
  CHECK(!answers_equal(Answer::of_number(2), Answer::of_number(-2)));
  CHECK(answers_equal(Answer::of_number(0.0), Answer::of_number(-0.0)));

  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK(answers_equal(Answer::of_number(inf), Answer::of_number(inf)));
  CHECK(!answers_equal(Answer::of_number(inf), Answer::of_number(-inf)));
  CHECK(!answers_equal(Answer::of_number(nan), Answer::of_number(nan)));
}

TEST_CASE("answers_equal: choices compare case-insensitively") {
  CHECK(answers_equal(Answer::of_choice('b'), Answer::of_choice('B')));
  CHECK(!answers_equal(Answer::of_choice('A'), Answer::of_choice('B')));
}

TEST_CASE("answers_equal: truth kinds do not cross") {
  CHECK(answers_equal(Answer::of_true_false(true), Answer::of_true_false(true)));
  CHECK(!answers_equal(Answer::of_true_false(true), Answer::of_true_false(false)));
  CHECK(answers_equal(Answer::of_yes_no(false), Answer::of_yes_no(false)));
  // Same stored bit, different kind: not equal.
  CHECK(!answers_equal(Answer::of_true_false(true), Answer::of_yes_no(true)));
  CHECK(!answers_equal(Answer::of_number(1), Answer::of_choice('A')));
}

TEST_CASE("answers_equal: dates ignore zero padding") {
  CHECK(answers_equal(Answer::of_date("4/19/1969"), Answer::of_date("04/19/1969")));
  CHECK(answers_equal(Answer::of_date(" 01/05/2015 "), Answer::of_date("1/5/2015")));
  CHECK(!answers_equal(Answer::of_date("4/19/1969"), Answer::of_date("4/20/1969")));
  // Non-slash shapes fall back to exact trimmed text.
  CHECK(answers_equal(Answer::of_date("June 4"), Answer::of_date("June 4 ")));
  CHECK(!answers_equal(Answer::of_date("June 4"), Answer::of_date("june 4")));
}

TEST_CASE("answers_equal: free text ignores case and whitespace runs") {
  CHECK(answers_equal(Answer::of_free("  New   York "), Answer::of_free("new york")));
  CHECK(!answers_equal(Answer::of_free("New York"), Answer::of_free("York")));
}

TEST_CASE("answer surfaces") {
  CHECK(Answer::of_number(8).surface() == "8");
  CHECK(Answer::of_number(8.5).surface() == "8.5");
  CHECK(Answer::of_number(-2).surface() == "-2");
  CHECK(Answer::of_number(169).surface() == "169");
  CHECK(Answer::of_choice('c').surface() == "C");
  CHECK(Answer::of_true_false(true).surface() == "True");
  CHECK(Answer::of_true_false(false).surface() == "False");
  CHECK(Answer::of_yes_no(true).surface() == "Yes");
  CHECK(Answer::of_yes_no(false).surface() == "No");
  CHECK(Answer::of_date("01/05/2015").surface() == "01/05/2015");
  CHECK(Answer::of_free("the bank").surface() == "the bank");
}

TEST_CASE("format_double_shortest picks the shortest faithful form") {
  CHECK(format_double_shortest(169) == "169");
  CHECK(format_double_shortest(0.5) == "0.5");
  CHECK(format_double_shortest(-0.25) == "-0.25");
  CHECK(format_double_shortest(2) == "2");
  CHECK(format_double_shortest(0.1) == "0.1");
}

TEST_CASE("format round-trips") {
  for (AnswerFormat f : {AnswerFormat::Number, AnswerFormat::MultipleChoice,
                         AnswerFormat::TrueFalse, AnswerFormat::YesNo, AnswerFormat::Date,
                         AnswerFormat::Free})
    CHECK(answer_format_from_string(to_string(f)) == f);
  CHECK(answer_format_from_string("choice") == AnswerFormat::MultipleChoice);
  CHECK_THROWS_AS(answer_format_from_string("riddle"), ParseError);
}

TEST_CASE("string helpers") {
  CHECK(trim_copy("  padded \n") == "padded");
  CHECK(trim_copy("") == "");
  CHECK(trim_copy(" \t ") == "");
  CHECK(collapse_ws("  a \n\t b  c ") == "a b c");
  CHECK(collapse_ws("") == "");
  CHECK(lower_copy("MiXeD Case 5") == "mixed case 5");
}

}  // TEST_SUITE
