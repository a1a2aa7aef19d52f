#include "selfverify/prompts.hpp"

#include <filesystem>

#include "selfverify/errors.hpp"
#include "selfverify/kvfile.hpp"

namespace selfverify {

const char* to_string(PromptKind k) {
  switch (k) {
    case PromptKind::Forward: return "forward";
    case PromptKind::Rewrite: return "rewrite";
    case PromptKind::CMV: return "cmv";
    case PromptKind::TFV: return "tfv";
  }
  return "?";
}

const char* to_string(PromptFamily f) {
  switch (f) {
    case PromptFamily::MathWord: return "math";
    case PromptFamily::AQuA: return "aqua";
    case PromptFamily::CSQA: return "csqa";
    case PromptFamily::DateUnderstanding: return "date";
  }
  return "?";
}

PromptKind prompt_kind_from_string(const std::string& s) {
  if (s == "forward") return PromptKind::Forward;
  if (s == "rewrite") return PromptKind::Rewrite;
  if (s == "cmv") return PromptKind::CMV;
  if (s == "tfv") return PromptKind::TFV;
  throw ParseError("unknown prompt kind: " + s);
}

PromptFamily prompt_family_from_string(const std::string& s) {
  if (s == "math") return PromptFamily::MathWord;
  if (s == "aqua") return PromptFamily::AQuA;
  if (s == "csqa") return PromptFamily::CSQA;
  if (s == "date") return PromptFamily::DateUnderstanding;
  throw ParseError("unknown prompt family: " + s);
}

const char* family_dir(PromptFamily f) { return to_string(f); }

PromptSet PromptSet::truncated(size_t shots) const {
  PromptSet out = *this;
  if (out.exemplars.size() > shots) out.exemplars.resize(shots);
  return out;
}

namespace {

std::string render_exemplars(const PromptSet& ps, const std::string& separator) {
  std::string out;
  for (const auto& ex : ps.exemplars) {
    out += "Q: " + ex.question + "\nA: " + ex.chain + " The answer is " + ex.answer + ".";
    out += separator;
  }
  return out;
}

}  // namespace

std::string render_forward(const PromptSet& ps, const Problem& problem,
                           const std::string& separator) {
  return render_exemplars(ps, separator) + "Q: " + problem.raw_text + "\nA:";
}

std::string render_rewrite(const std::string& question, const Answer& answer) {
  return "Please change the questions and answers into complete declarative sentences [" +
         question + "] The answer is [" + answer.surface() + "]";
}

std::string render_cmv(const PromptSet& ps, const std::string& masked_text,
                       const std::string& separator) {
  if (masked_text.find('X') == std::string::npos)
    throw NoMaskError("CMV prompt body has no 'X' mask: " + masked_text.substr(0, 80));
  return render_exemplars(ps, separator) + "Q: \"" + masked_text +
         "\" What is the answer of 'X'?\nA:";
}

std::string render_tfv(const PromptSet& ps, const std::string& statement,
                       const std::string& separator) {
  return render_exemplars(ps, separator) + "Q: '" + statement +
         "' Do it is correct (True or False)?\nA:";
}

PromptSet load_prompt_file(const std::string& path) {
  KvDoc doc = kv_parse_file(path);
  PromptSet ps;
  ps.kind = prompt_kind_from_string(doc.get_str("kind"));
  ps.family = prompt_family_from_string(doc.get_str("family"));
  for (const auto& sec : doc.sections) {
    if (sec.name != "exemplar")
      throw ParseError(path + ": unexpected section [[" + sec.name + "]]");
    FewShotExemplar ex;
    auto need = [&](const char* key) -> const std::string& {
      auto it = sec.entries.find(key);
      if (it == sec.entries.end() || it->second.type != KvValue::Type::Str)
        throw ParseError(path + ": exemplar missing string key '" + key + "'");
      return it->second.str;
    };
    ex.question = need("question");
    ex.chain = need("chain");
    ex.answer = need("answer");
    ps.exemplars.push_back(std::move(ex));
  }
  return ps;
}

void save_prompt_file(const PromptSet& ps, const std::string& path) {
  KvDoc doc;
  doc.root["kind"] = KvValue::of_str(to_string(ps.kind));
  doc.root["family"] = KvValue::of_str(to_string(ps.family));
  for (const auto& ex : ps.exemplars) {
    KvSection sec;
    sec.name = "exemplar";
    sec.entries["question"] = KvValue::of_str(ex.question);
    sec.entries["chain"] = KvValue::of_str(ex.chain);
    sec.entries["answer"] = KvValue::of_str(ex.answer);
    doc.sections.push_back(std::move(sec));
  }
  kv_write_file(doc, path);
}

PromptLibrary PromptLibrary::load_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("prompt directory not found: " + dir);
  PromptLibrary lib;
  for (PromptFamily family : {PromptFamily::MathWord, PromptFamily::AQuA, PromptFamily::CSQA,
                              PromptFamily::DateUnderstanding}) {
    fs::path fam_dir = fs::path(dir) / family_dir(family);
    if (!fs::is_directory(fam_dir)) continue;
    for (PromptKind kind :
         {PromptKind::Forward, PromptKind::Rewrite, PromptKind::CMV, PromptKind::TFV}) {
      fs::path file = fam_dir / (std::string(to_string(kind)) + ".prompts");
      if (!fs::exists(file)) continue;
      PromptSet ps = load_prompt_file(file.string());
      if (ps.family != family || ps.kind != kind)
        throw ConfigError(file.string() + ": kind/family keys disagree with file location");
      lib.add(std::move(ps));
    }
  }
  return lib;
}

void PromptLibrary::add(PromptSet ps) {
  for (auto& existing : sets_) {
    if (existing.family == ps.family && existing.kind == ps.kind) {
      existing = std::move(ps);
      return;
    }
  }
  sets_.push_back(std::move(ps));
}

const PromptSet* PromptLibrary::find(PromptFamily family, PromptKind kind) const {
  for (const auto& ps : sets_)
    if (ps.family == family && ps.kind == kind) return &ps;
  return nullptr;
}

const PromptSet& PromptLibrary::require(PromptFamily family, PromptKind kind) const {
  const PromptSet* ps = find(family, kind);
  if (!ps)
    throw ConfigError(std::string("missing prompt fixture: ") + family_dir(family) + "/" +
                      to_string(kind) + ".prompts");
  return *ps;
}

}  // namespace selfverify
