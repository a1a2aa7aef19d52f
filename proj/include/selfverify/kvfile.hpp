#pragma once

// Small TOML-ish text format used for prompt fixtures and run configs.
// Deliberately tiny so files stay hand-editable and diffs stay readable:
//
//   # comment
//   key = "single-line string with \n escapes"
//   other = """raw text,
//   may span lines, quotes " are fine"""
//   count = 5
//   ratio = 0.7
//   flag = true
//   stops = ["\n\nQ:", "END"]
//
//   [[exemplar]]          # starts a new record in the "exemplar" array
//   question = "..."
//
// Keys may contain dots ("backend.kind"). Root keys come before the first
// [[section]] marker. Serialization round-trips exactly.

#include <map>
#include <string>
#include <vector>

namespace selfverify {

struct KvValue {
  enum class Type { Str, Num, Bool, StrList };
  Type type = Type::Str;
  std::string str;
  double num = 0.0;
  bool boolean = false;
  std::vector<std::string> list;

  static KvValue of_str(std::string s);
  static KvValue of_num(double n);
  static KvValue of_bool(bool b);
  static KvValue of_list(std::vector<std::string> l);

  bool operator==(const KvValue& o) const;
};

struct KvSection {
  std::string name;
  std::map<std::string, KvValue> entries;
  bool operator==(const KvSection& o) const = default;
};

struct KvDoc {
  std::map<std::string, KvValue> root;
  std::vector<KvSection> sections;

  bool has(const std::string& key) const { return root.count(key) != 0; }
  // Typed getters throw ParseError when the key is missing or mistyped;
  // *_or variants return the fallback when the key is absent.
  const std::string& get_str(const std::string& key) const;
  std::string get_str_or(const std::string& key, const std::string& dflt) const;
  double get_num(const std::string& key) const;
  double get_num_or(const std::string& key, double dflt) const;
  long get_int_or(const std::string& key, long dflt) const;
  bool get_bool_or(const std::string& key, bool dflt) const;
  std::vector<std::string> get_list_or(const std::string& key,
                                       std::vector<std::string> dflt) const;

  bool operator==(const KvDoc& o) const = default;
};

// Throws ParseError with a line number on malformed input.
KvDoc kv_parse(const std::string& text, const std::string& origin = "<string>");
KvDoc kv_parse_file(const std::string& path);
std::string kv_serialize(const KvDoc& doc);
void kv_write_file(const KvDoc& doc, const std::string& path);

}  // namespace selfverify
