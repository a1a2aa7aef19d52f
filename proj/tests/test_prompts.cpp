#include <doctest.h>

#include <filesystem>
#include <string>

#include "selfverify/core.hpp"
#include "selfverify/errors.hpp"
#include "selfverify/prompts.hpp"
#include "support/testutil.hpp"

using namespace selfverify;

namespace {

PromptSet tiny_set(PromptKind kind, PromptFamily family = PromptFamily::MathWord) {
  PromptSet ps;
  ps.kind = kind;
  ps.family = family;
  ps.exemplars.push_back({"How many birds?", "There were 4 birds and 2 flew off. 4 - 2 = 2.", "2"});
  ps.exemplars.push_back({"How many cats?", "Three cats sat. 3 stayed.", "3"});
  return ps;
}

const std::string kShippedPrompts = std::string(SELFVERIFY_SOURCE_DIR) + "/prompts";

}  // namespace

TEST_SUITE("prompts") {

TEST_CASE("kind and family names round-trip") {
  for (PromptKind k : {PromptKind::Forward, PromptKind::Rewrite, PromptKind::CMV, PromptKind::TFV})
    CHECK(prompt_kind_from_string(to_string(k)) == k);
  for (PromptFamily f : {PromptFamily::MathWord, PromptFamily::AQuA, PromptFamily::CSQA,
                         PromptFamily::DateUnderstanding})
    CHECK(prompt_family_from_string(to_string(f)) == f);
  CHECK_THROWS_AS(prompt_kind_from_string("sideways"), ParseError);
  CHECK_THROWS_AS(prompt_family_from_string("physics"), ParseError);
  CHECK(std::string(family_dir(PromptFamily::DateUnderstanding)) == "date");
}

TEST_CASE("forward rendering is byte-stable") {
  Problem p = make_problem("t", "Jim has 5 pens. How many pens does Jim have?",
                           AnswerFormat::Number);
  const std::string prompt = render_forward(tiny_set(PromptKind::Forward), p);
  CHECK(prompt ==
        "Q: How many birds?\n"
        "A: There were 4 birds and 2 flew off. 4 - 2 = 2. The answer is 2.\n"
        "\n"
        "Q: How many cats?\n"
        "A: Three cats sat. 3 stayed. The answer is 3.\n"
        "\n"
        "Q: Jim has 5 pens. How many pens does Jim have?\nA:");
}

TEST_CASE("a zero-shot set renders only the target block") {
  Problem p = make_problem("t", "Count to 3. What comes next?", AnswerFormat::Number);
  PromptSet none = tiny_set(PromptKind::Forward).truncated(0);
  CHECK(none.exemplars.empty());
  CHECK(render_forward(none, p) == "Q: Count to 3. What comes next?\nA:");
}

TEST_CASE("truncation keeps the leading exemplars") {
  PromptSet ps = tiny_set(PromptKind::Forward);
  CHECK(ps.truncated(1).exemplars.size() == 1);
  CHECK(ps.truncated(1).exemplars[0].answer == "2");
  CHECK(ps.truncated(5).exemplars.size() == 2);  // shots beyond size: unchanged
}

TEST_CASE("custom separators apply between exemplars and target") {
  Problem p = make_problem("t", "One. Two?", AnswerFormat::Number);
  const std::string prompt =
      render_forward(tiny_set(PromptKind::Forward).truncated(1), p, "\n---\n");
  CHECK(prompt ==
        "Q: How many birds?\n"
        "A: There were 4 birds and 2 flew off. 4 - 2 = 2. The answer is 2.\n---\n"
        "Q: One. Two?\nA:");
}

TEST_CASE("the rewrite instruction embeds the question and answer surface") {
  CHECK(render_rewrite("How many apples does Jackie have more than Adam?",
                       Answer::of_number(18)) ==
        "Please change the questions and answers into complete declarative sentences "
        "[How many apples does Jackie have more than Adam?] The answer is [18]");
  CHECK(render_rewrite("Is it heavy?", Answer::of_true_false(false)) ==
        "Please change the questions and answers into complete declarative sentences "
        "[Is it heavy?] The answer is [False]");
}

TEST_CASE("masked-condition probes require a mask and quote the body") {
  PromptSet ps = tiny_set(PromptKind::CMV).truncated(1);
  const std::string prompt =
      render_cmv(ps, "Jackie has 'X' apples. Jackie has 18 apples more than Adam.");
  CHECK(prompt ==
        "Q: How many birds?\n"
        "A: There were 4 birds and 2 flew off. 4 - 2 = 2. The answer is 2.\n"
        "\n"
        "Q: \"Jackie has 'X' apples. Jackie has 18 apples more than Adam.\" "
        "What is the answer of 'X'?\nA:");
  CHECK_THROWS_AS(render_cmv(ps, "nothing masked here"), NoMaskError);
}

TEST_CASE("true-false probes quote the statement with the fixed question tail") {
  const std::string prompt =
      render_tfv(tiny_set(PromptKind::TFV).truncated(0), "Tim will need 36 lemons.");
  CHECK(prompt == "Q: 'Tim will need 36 lemons.' Do it is correct (True or False)?\nA:");
}

TEST_CASE("the shipped fixture library is complete for every dataset family") {
  PromptLibrary lib = PromptLibrary::load_dir(kShippedPrompts);
  CHECK(lib.size() == 10);

  auto shots = [&](PromptFamily f, PromptKind k) -> size_t {
    const PromptSet* ps = lib.find(f, k);
    return ps ? ps->exemplars.size() : 0;
  };
  CHECK(shots(PromptFamily::MathWord, PromptKind::Forward) == 8);
  CHECK(shots(PromptFamily::MathWord, PromptKind::CMV) == 8);
  CHECK(shots(PromptFamily::MathWord, PromptKind::TFV) == 8);
  CHECK(shots(PromptFamily::AQuA, PromptKind::Forward) == 4);
  CHECK(shots(PromptFamily::AQuA, PromptKind::CMV) == 4);
  CHECK(shots(PromptFamily::AQuA, PromptKind::TFV) == 4);
  CHECK(shots(PromptFamily::CSQA, PromptKind::Forward) == 7);
  CHECK(shots(PromptFamily::CSQA, PromptKind::TFV) == 7);
  CHECK(shots(PromptFamily::DateUnderstanding, PromptKind::Forward) == 6);
  CHECK(shots(PromptFamily::DateUnderstanding, PromptKind::CMV) == 6);

  // Families without a published fixture of a given kind simply lack it.
  CHECK(lib.find(PromptFamily::CSQA, PromptKind::CMV) == nullptr);
  CHECK(lib.find(PromptFamily::DateUnderstanding, PromptKind::TFV) == nullptr);
  CHECK(lib.find(PromptFamily::MathWord, PromptKind::Rewrite) == nullptr);

  try {
    lib.require(PromptFamily::CSQA, PromptKind::CMV);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("csqa/cmv.prompts") != std::string::npos);
  }
}

TEST_CASE("shipped math exemplars spot-check") {
  PromptLibrary lib = PromptLibrary::load_dir(kShippedPrompts);
  const PromptSet& fwd = lib.require(PromptFamily::MathWord, PromptKind::Forward);
  CHECK(fwd.exemplars[0].question.rfind("There are 15 trees in the grove", 0) == 0);
  CHECK(fwd.exemplars[0].answer == "6");
  CHECK(fwd.exemplars[7].answer == "8");

  const PromptSet& cmv = lib.require(PromptFamily::MathWord, PromptKind::CMV);
  CHECK(cmv.exemplars[0].answer == "15");
  CHECK(cmv.exemplars[0].question.find("'X'") != std::string::npos);

  const PromptSet& tfv = lib.require(PromptFamily::MathWord, PromptKind::TFV);
  CHECK(tfv.exemplars[0].answer == "False");
  CHECK(tfv.exemplars[1].answer == "True");
}

TEST_CASE("loading a missing prompt directory fails") {
  CHECK_THROWS_AS(PromptLibrary::load_dir("/no/such/prompt/dir"), ConfigError);
}

TEST_CASE("a fixture whose keys disagree with its location is rejected") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.file("math/forward.prompts"),
                       "kind = \"forward\"\n"
                       "family = \"aqua\"\n"
                       "[[exemplar]]\n"
                       "question = \"q\"\n"
                       "chain = \"c\"\n"
                       "answer = \"1\"\n");
  CHECK_THROWS_AS(PromptLibrary::load_dir(tmp.str()), ConfigError);
}

TEST_CASE("partial prompt directories load what exists") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.file("math/forward.prompts"),
                       "kind = \"forward\"\n"
                       "family = \"math\"\n"
                       "[[exemplar]]\n"
                       "question = \"q\"\n"
                       "chain = \"c\"\n"
                       "answer = \"1\"\n");
  PromptLibrary lib = PromptLibrary::load_dir(tmp.str());
  CHECK(lib.size() == 1);
  CHECK(lib.find(PromptFamily::MathWord, PromptKind::Forward) != nullptr);
  CHECK(lib.find(PromptFamily::MathWord, PromptKind::CMV) == nullptr);
}

TEST_CASE("fixture files validate their structure") {
  testutil::TempDir tmp;

  testutil::write_file(tmp.file("nokind.prompts"), "family = \"math\"\n");
  CHECK_THROWS_AS(load_prompt_file(tmp.file("nokind.prompts")), ParseError);

  testutil::write_file(tmp.file("badsection.prompts"),
                       "kind = \"forward\"\nfamily = \"math\"\n[[sample]]\nquestion = \"q\"\n");
  CHECK_THROWS_AS(load_prompt_file(tmp.file("badsection.prompts")), ParseError);

  testutil::write_file(tmp.file("nochain.prompts"),
                       "kind = \"forward\"\nfamily = \"math\"\n"
                       "[[exemplar]]\nquestion = \"q\"\nanswer = \"1\"\n");
  CHECK_THROWS_AS(load_prompt_file(tmp.file("nochain.prompts")), ParseError);
}

TEST_CASE("fixtures round-trip through save and load") {
  testutil::TempDir tmp;
  PromptSet ps = tiny_set(PromptKind::TFV, PromptFamily::AQuA);
  ps.exemplars[0].question = "Line one\nLine \"two\" quoted";
  const std::string path = tmp.file("roundtrip.prompts");
  save_prompt_file(ps, path);
  CHECK(load_prompt_file(path) == ps);
}

TEST_CASE("adding a set with the same address replaces it") {
  PromptLibrary lib;
  lib.add(tiny_set(PromptKind::Forward));
  PromptSet replacement = tiny_set(PromptKind::Forward).truncated(1);
  lib.add(replacement);
  CHECK(lib.size() == 1);
  CHECK(lib.require(PromptFamily::MathWord, PromptKind::Forward).exemplars.size() == 1);
}

}  // TEST_SUITE
