#include "selfverify/datasets.hpp"

#include <array>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "selfverify/errors.hpp"
#include "selfverify/rng.hpp"

namespace selfverify {

using nlohmann::json;

namespace {

void warn(std::vector<std::string>* warnings, std::string msg) {
  if (warnings) warnings->push_back(std::move(msg));
}

void check_count(const std::string& name, size_t got, std::vector<std::string>* warnings) {
  auto expected = expected_dataset_count(name);
  if (expected && *expected != got)
    warn(warnings, name + ": expected " + std::to_string(*expected) + " records, loaded " +
                       std::to_string(got));
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);
  std::vector<json> records;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim_copy(line).empty()) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// First number in the text, commas stripped — how gold labels like
// "#### 1,234" or "72.0" are read.
double parse_gold_number(const std::string& text, const std::string& where) {
  std::string stripped;
  for (char c : text)
    if (c != ',') stripped += c;
  size_t i = 0;
  while (i < stripped.size()) {
    char c = stripped[i];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < stripped.size() &&
         std::isdigit(static_cast<unsigned char>(stripped[i + 1]))))
      break;
    ++i;
  }
  if (i == stripped.size()) throw ParseError("no numeric gold answer in " + where);
  return std::strtod(stripped.c_str() + i, nullptr);
}

// "A)50" / "(a) 50" / "B) 45" -> letter + text.
std::pair<char, std::string> parse_option(const std::string& raw) {
  size_t i = 0;
  while (i < raw.size() && (raw[i] == '(' || raw[i] == ' ')) ++i;
  if (i >= raw.size()) throw ParseError("empty answer option");
  char letter = raw[i];
  ++i;
  while (i < raw.size() && (raw[i] == ')' || raw[i] == '.' || raw[i] == ':' || raw[i] == ' ')) ++i;
  return {letter, trim_copy(raw.substr(i))};
}

std::string render_choices(const std::vector<std::pair<char, std::string>>& options) {
  std::string out = "Answer Choices:";
  for (const auto& [letter, text] : options) {
    out += " (";
    out += char(std::tolower(static_cast<unsigned char>(letter)));
    out += ") " + text;
  }
  return out;
}

}  // namespace

std::vector<Problem> load_gsm8k(const std::string& path, std::vector<std::string>* warnings) {
  std::vector<Problem> problems;
  auto records = read_jsonl(path);
  for (size_t i = 0; i < records.size(); ++i) {
    const json& rec = records[i];
    std::string question = rec.at("question").get<std::string>();
    std::string answer = rec.at("answer").get<std::string>();
    size_t marker = answer.rfind("#### ");
    if (marker == std::string::npos)
      throw ParseError(path + ": record " + std::to_string(i) + " has no '#### ' gold marker");
    double gold = parse_gold_number(answer.substr(marker + 5), "gsm8k record " + std::to_string(i));
    problems.push_back(make_problem("gsm8k-" + std::to_string(i), question, AnswerFormat::Number,
                                    Answer::of_number(gold)));
  }
  check_count("gsm8k", problems.size(), warnings);
  return problems;
}

std::vector<Problem> load_aqua(const std::string& path, std::vector<std::string>* warnings) {
  std::vector<Problem> problems;
  auto records = read_jsonl(path);
  for (size_t i = 0; i < records.size(); ++i) {
    const json& rec = records[i];
    std::string question = trim_copy(rec.at("question").get<std::string>());
    std::vector<std::pair<char, std::string>> options;
    for (const auto& opt : rec.at("options")) options.push_back(parse_option(opt.get<std::string>()));
    std::string correct = rec.at("correct").get<std::string>();
    if (correct.empty()) throw ParseError(path + ": record " + std::to_string(i) + " has no gold");
    std::string raw_text = question + " " + render_choices(options);
    problems.push_back(make_problem("aqua-" + std::to_string(i), raw_text,
                                    AnswerFormat::MultipleChoice, Answer::of_choice(correct[0])));
  }
  check_count("aqua", problems.size(), warnings);
  return problems;
}

std::vector<Problem> load_svamp(const std::string& path, std::vector<std::string>* warnings) {
  std::vector<Problem> problems;
  json doc = read_json(path);
  if (!doc.is_array()) throw ParseError(path + ": expected a top-level array");
  for (size_t i = 0; i < doc.size(); ++i) {
    const json& rec = doc[i];
    std::string body = trim_copy(rec.at("Body").get<std::string>());
    std::string question = trim_copy(rec.at("Question").get<std::string>());
    double gold = rec.at("Answer").get<double>();
    problems.push_back(make_problem("svamp-" + std::to_string(i), body + " " + question,
                                    AnswerFormat::Number, Answer::of_number(gold)));
  }
  check_count("svamp", problems.size(), warnings);
  return problems;
}

namespace {

// Dotted-path lookup ("question.stem"). Throws on a missing segment.
const json& resolve_path(const json& rec, const std::string& path, const std::string& where) {
  const json* node = &rec;
  size_t start = 0;
  while (start <= path.size()) {
    size_t dot = path.find('.', start);
    std::string seg = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!seg.empty()) {
      if (!node->is_object() || !node->contains(seg))
        throw ParseError(where + ": missing field '" + path + "'");
      node = &(*node)[seg];
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return *node;
}

std::string node_as_text(const json& node) {
  if (node.is_string()) return node.get<std::string>();
  if (node.is_number()) return format_double_shortest(node.get<double>());
  if (node.is_array() && !node.empty()) return node_as_text(node[0]);
  if (node.is_object()) {
    // target_scores style: {"05/01/2021": 1, "05/02/2021": 0} — pick the
    // highest-scoring key.
    std::string best;
    double best_score = -1e300;
    for (auto it = node.begin(); it != node.end(); ++it) {
      double s = it.value().is_number() ? it.value().get<double>() : 0.0;
      if (s > best_score) {
        best_score = s;
        best = it.key();
      }
    }
    return best;
  }
  throw ParseError("cannot read an answer from JSON node: " + node.dump().substr(0, 80));
}

Answer gold_for_format(AnswerFormat format, const std::string& text, const std::string& where) {
  switch (format) {
    case AnswerFormat::Number:
      return Answer::of_number(parse_gold_number(text, where));
    case AnswerFormat::MultipleChoice: {
      for (char c : text) {
        char up = char(std::toupper(static_cast<unsigned char>(c)));
        if (up >= 'A' && up <= 'E') return Answer::of_choice(up);
      }
      throw ParseError(where + ": no choice letter in gold '" + text + "'");
    }
    case AnswerFormat::TrueFalse:
      return Answer::of_true_false(lower_copy(trim_copy(text)) == "true");
    case AnswerFormat::YesNo:
      return Answer::of_yes_no(lower_copy(trim_copy(text)) == "yes");
    case AnswerFormat::Date:
      return Answer::of_date(trim_copy(text));
    case AnswerFormat::Free:
      return Answer::of_free(trim_copy(text));
  }
  throw ParseError(where + ": unhandled format");
}

}  // namespace

std::vector<Problem> load_generic(const std::string& path,
                                  const std::map<std::string, std::string>& field_map,
                                  const std::string& id_prefix,
                                  std::vector<std::string>* warnings) {
  (void)warnings;
  auto get = [&](const char* key) -> std::string {
    auto it = field_map.find(key);
    return it == field_map.end() ? std::string() : it->second;
  };
  std::string question_path = get("question");
  std::string answer_path = get("answer");
  if (question_path.empty() || answer_path.empty())
    throw ConfigError("generic dataset loader needs field_map question/answer for " + path);
  AnswerFormat format =
      get("format").empty() ? AnswerFormat::Number : answer_format_from_string(get("format"));

  json doc;
  bool jsonl = path.size() > 6 && path.substr(path.size() - 6) == ".jsonl";
  if (jsonl) {
    doc = json::array();
    for (auto& rec : read_jsonl(path)) doc.push_back(std::move(rec));
  } else {
    doc = read_json(path);
  }
  const json* records = &doc;
  if (!get("root").empty()) records = &resolve_path(doc, get("root"), path);
  if (!records->is_array()) throw ParseError(path + ": record container is not an array");

  std::vector<Problem> problems;
  for (size_t i = 0; i < records->size(); ++i) {
    std::string where = path + " record " + std::to_string(i);
    const json& rec = (*records)[i];
    std::string text = trim_copy(resolve_path(rec, question_path, where).get<std::string>());
    if (!get("choices").empty()) {
      const json& choices = resolve_path(rec, get("choices"), where);
      std::vector<std::pair<char, std::string>> options;
      for (const auto& choice : choices) {
        std::string label = choice.at("label").get<std::string>();
        options.emplace_back(label.empty() ? '?' : label[0], choice.at("text").get<std::string>());
      }
      text += " " + render_choices(options);
    }
    std::string gold_text = node_as_text(resolve_path(rec, answer_path, where));
    problems.push_back(make_problem(id_prefix + "-" + std::to_string(i), text, format,
                                    gold_for_format(format, gold_text, where)));
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Synthetic problems

namespace {

const char* kNames[] = {"Alice", "Ben",   "Carla", "David", "Emma",
                        "Frank", "Grace", "Henry", "Iris",  "Jack"};
const char* kObjects[] = {"apples", "marbles", "books",    "pencils",
                          "coins",  "stickers", "cards",   "shells"};
const char* kPlaces[] = {"basket", "box", "shelf", "jar"};

// Four operands, all distinct, in [2, 99].
std::array<int, 4> draw_operands(Rng& rng) {
  std::array<int, 4> v{};
  for (size_t i = 0; i < v.size(); ++i) {
    int x;
    bool fresh;
    do {
      x = rng.int_in(2, 99);
      fresh = true;
      for (size_t j = 0; j < i; ++j)
        if (v[j] == x) fresh = false;
    } while (!fresh);
    v[i] = x;
  }
  return v;
}

}  // namespace

std::vector<Problem> gen_synthetic(int n, uint64_t seed) {
  std::vector<Problem> problems;
  Rng rng(mix_seed({seed, 0x5e7ee71c}));
  for (int i = 0; i < n; ++i) {
    int tmpl = int(rng.below(4));
    auto v = draw_operands(rng);
    std::string a = std::to_string(v[0]), b = std::to_string(v[1]), c = std::to_string(v[2]),
                d = std::to_string(v[3]);
    const char* name = kNames[rng.below(std::size(kNames))];
    const char* name2 = kNames[rng.below(std::size(kNames))];
    while (std::string(name2) == name) name2 = kNames[rng.below(std::size(kNames))];
    const char* obj = kObjects[rng.below(std::size(kObjects))];
    const char* place = kPlaces[rng.below(std::size(kPlaces))];

    std::string text;
    double gold = 0;
    switch (tmpl) {
      case 0:
        text = std::string(name) + " has " + a + " " + obj + ". " + name2 + " has " + b + " " +
               obj + ". How many " + obj + " do they have in total?";
        gold = v[0] + v[1];
        break;
      case 1: {
        if (v[0] < v[1]) std::swap(v[0], v[1]);  // keep the count non-negative
        a = std::to_string(v[0]);
        b = std::to_string(v[1]);
        text = std::string(name) + " had " + a + " " + obj + ". " + name + " gave " + b + " " +
               obj + " to " + name2 + ". Then " + name + " bought " + c + " more " + obj + ". " +
               "How many " + obj + " does " + name + " have now?";
        gold = v[0] - v[1] + v[2];
        break;
      }
      case 2:
        text = std::string(name) + " worked " + a + " hours on Monday, " + b +
               " hours on Tuesday, and " + c + " hours on Wednesday. " + name + " earns " + d +
               " dollars per hour. How much money did " + name + " earn over these days?";
        gold = double(v[0] + v[1] + v[2]) * v[3];
        break;
      default: {
        if (v[2] > v[0] + v[1]) std::swap(v[2], v[0]);  // keep the count non-negative
        a = std::to_string(v[0]);
        c = std::to_string(v[2]);
        text = std::string("There were ") + a + " " + obj + " in the " + place + ". " + name +
               " brought " + b + " more " + obj + ". " + name2 + " took away " + c + " " + obj +
               ". How many " + obj + " are in the " + place + " now?";
        gold = v[0] + v[1] - v[2];
        break;
      }
    }
    problems.push_back(make_problem(
        "syn-" + std::to_string(seed) + "-" + std::to_string(i) + "-t" + std::to_string(tmpl),
        text, AnswerFormat::Number, Answer::of_number(gold)));
  }
  return problems;
}

std::vector<Problem> load_dataset(const DatasetConfig& cfg, uint64_t seed,
                                  std::vector<std::string>* warnings) {
  const std::string& name = cfg.name;
  if (name == "synthetic") return gen_synthetic(cfg.count, seed);
  if (name == "gsm8k") return load_gsm8k(cfg.path, warnings);
  if (name == "aqua") return load_aqua(cfg.path, warnings);
  if (name == "svamp") return load_svamp(cfg.path, warnings);

  std::map<std::string, std::string> fm = cfg.field_map;
  auto set_default = [&](const char* key, const char* value) {
    if (!fm.count(key)) fm[key] = value;
  };
  if (name == "singleeq" || name == "addsub" || name == "multiarith") {
    set_default("question", "sQuestion");
    set_default("answer", "lSolutions");
    set_default("format", "number");
  } else if (name == "csqa") {
    set_default("question", "question.stem");
    set_default("choices", "question.choices");
    set_default("answer", "answerKey");
    set_default("format", "multiple_choice");
  } else if (name == "date") {
    set_default("root", "examples");
    set_default("question", "input");
    set_default("answer", "target");
    set_default("format", "date");
  }
  auto problems = load_generic(cfg.path, fm, name, warnings);
  check_count(name, problems.size(), warnings);
  return problems;
}

PromptFamily family_for_dataset(const std::string& name) {
  if (name == "aqua") return PromptFamily::AQuA;
  if (name == "csqa") return PromptFamily::CSQA;
  if (name == "date") return PromptFamily::DateUnderstanding;
  return PromptFamily::MathWord;  // gsm8k, svamp, singleeq, addsub,
                                  // multiarith, synthetic, custom
}

std::optional<size_t> expected_dataset_count(const std::string& name) {
  if (name == "gsm8k") return 1319;
  if (name == "singleeq") return 508;
  if (name == "addsub") return 395;
  if (name == "multiarith") return 600;
  if (name == "aqua") return 254;
  if (name == "svamp") return 1000;
  if (name == "csqa") return 1221;
  if (name == "date") return 369;
  return std::nullopt;
}

}  // namespace selfverify
