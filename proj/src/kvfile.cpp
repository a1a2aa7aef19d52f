#include "selfverify/kvfile.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "selfverify/errors.hpp"

namespace selfverify {

KvValue KvValue::of_str(std::string s) {
  KvValue v;
  v.type = Type::Str;
  v.str = std::move(s);
  return v;
}

KvValue KvValue::of_num(double n) {
  KvValue v;
  v.type = Type::Num;
  v.num = n;
  return v;
}

KvValue KvValue::of_bool(bool b) {
  KvValue v;
  v.type = Type::Bool;
  v.boolean = b;
  return v;
}

KvValue KvValue::of_list(std::vector<std::string> l) {
  KvValue v;
  v.type = Type::StrList;
  v.list = std::move(l);
  return v;
}

bool KvValue::operator==(const KvValue& o) const {
  if (type != o.type) return false;
  switch (type) {
    case Type::Str: return str == o.str;
    case Type::Num: return num == o.num;
    case Type::Bool: return boolean == o.boolean;
    case Type::StrList: return list == o.list;
  }
  return false;
}

namespace {

[[noreturn]] void fail(const std::string& origin, size_t line, const std::string& what) {
  throw ParseError(origin + ":" + std::to_string(line) + ": " + what);
}

bool is_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-' || c == '+';
}

// Parses a quoted "..." string with backslash escapes starting at text[i]
// (which must be the opening quote). Leaves i after the closing quote.
std::string parse_quoted(const std::string& text, size_t& i, const std::string& origin,
                         size_t line) {
  std::string out;
  ++i;  // opening quote
  while (i < text.size() && text[i] != '"') {
    char c = text[i];
    if (c == '\n') fail(origin, line, "newline inside single-line string");
    if (c == '\\') {
      ++i;
      if (i >= text.size()) fail(origin, line, "dangling escape");
      switch (text[i]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '\\': out += '\\'; break;
        case '"': out += '"'; break;
        default: fail(origin, line, std::string("unknown escape \\") + text[i]);
      }
    } else {
      out += c;
    }
    ++i;
  }
  if (i >= text.size()) fail(origin, line, "unterminated string");
  ++i;  // closing quote
  return out;
}

}  // namespace

KvDoc kv_parse(const std::string& text, const std::string& origin) {
  KvDoc doc;
  KvSection* current = nullptr;
  size_t i = 0;
  size_t line = 1;

  auto count_lines = [&](size_t from, size_t to) {
    for (size_t k = from; k < to; ++k)
      if (text[k] == '\n') ++line;
  };

  while (i < text.size()) {
    // Skip blank space at line starts.
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
    if (i < text.size() && text[i] == '\n') {
      ++i;
      ++line;
      continue;
    }
    if (i >= text.size()) break;

    if (text[i] == '#') {  // comment to end of line
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }

    if (text[i] == '[') {  // [[section]]
      if (text.compare(i, 2, "[[") != 0) fail(origin, line, "expected [[section]]");
      size_t close = text.find("]]", i + 2);
      if (close == std::string::npos) fail(origin, line, "unterminated [[section]]");
      std::string name = text.substr(i + 2, close - i - 2);
      if (name.empty()) fail(origin, line, "empty section name");
      doc.sections.push_back(KvSection{name, {}});
      current = &doc.sections.back();
      i = close + 2;
      continue;
    }

    // key = value
    size_t key_start = i;
    while (i < text.size() && is_key_char(text[i])) ++i;
    std::string key = text.substr(key_start, i - key_start);
    if (key.empty()) fail(origin, line, "expected a key");
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size() || text[i] != '=') fail(origin, line, "expected '=' after key " + key);
    ++i;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size()) fail(origin, line, "missing value for key " + key);

    KvValue value;
    if (text.compare(i, 3, "\"\"\"") == 0) {
      size_t body = i + 3;
      if (body < text.size() && text[body] == '\n') ++body;  // toml-style: eat first newline
      size_t close = text.find("\"\"\"", body);
      if (close == std::string::npos) fail(origin, line, "unterminated raw string");
      value = KvValue::of_str(text.substr(body, close - body));
      count_lines(i, close + 3);
      i = close + 3;
    } else if (text[i] == '"') {
      value = KvValue::of_str(parse_quoted(text, i, origin, line));
    } else if (text[i] == '[') {
      ++i;
      std::vector<std::string> items;
      while (true) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == ',')) ++i;
        if (i >= text.size()) fail(origin, line, "unterminated list");
        if (text[i] == ']') {
          ++i;
          break;
        }
        if (text[i] != '"') fail(origin, line, "lists hold quoted strings only");
        items.push_back(parse_quoted(text, i, origin, line));
      }
      value = KvValue::of_list(std::move(items));
    } else if (text.compare(i, 4, "true") == 0 && (i + 4 >= text.size() || !is_key_char(text[i + 4]))) {
      value = KvValue::of_bool(true);
      i += 4;
    } else if (text.compare(i, 5, "false") == 0 && (i + 5 >= text.size() || !is_key_char(text[i + 5]))) {
      value = KvValue::of_bool(false);
      i += 5;
    } else {
      size_t num_start = i;
      while (i < text.size() && (is_key_char(text[i]))) ++i;
      std::string tok = text.substr(num_start, i - num_start);
      try {
        size_t used = 0;
        double n = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        value = KvValue::of_num(n);
      } catch (const std::exception&) {
        fail(origin, line, "cannot parse value '" + tok + "' for key " + key);
      }
    }

    // Rest of line must be blank or a comment.
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
    if (i < text.size() && text[i] == '#')
      while (i < text.size() && text[i] != '\n') ++i;
    if (i < text.size() && text[i] != '\n') fail(origin, line, "trailing junk after value for " + key);

    auto& target = current ? current->entries : doc.root;
    if (target.count(key)) fail(origin, line, "duplicate key " + key);
    target[key] = std::move(value);
  }
  return doc;
}

KvDoc kv_parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return kv_parse(ss.str(), path);
}

namespace {

std::string format_num(double n) {
  if (n == std::floor(n) && std::abs(n) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(n));
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", n);
  return buf;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

void write_value(std::ostream& os, const KvValue& v) {
  switch (v.type) {
    case KvValue::Type::Str:
      if (v.str.find('\n') != std::string::npos || v.str.find('"') != std::string::npos) {
        if (v.str.find("\"\"\"") != std::string::npos)
          throw ParseError("string containing \\\"\\\"\\\" cannot be serialized");
        os << "\"\"\"\n" << v.str << "\"\"\"";
      } else {
        os << quote(v.str);
      }
      break;
    case KvValue::Type::Num:
      os << format_num(v.num);
      break;
    case KvValue::Type::Bool:
      os << (v.boolean ? "true" : "false");
      break;
    case KvValue::Type::StrList: {
      os << '[';
      for (size_t k = 0; k < v.list.size(); ++k) {
        if (k) os << ", ";
        os << quote(v.list[k]);
      }
      os << ']';
      break;
    }
  }
}

}  // namespace

std::string kv_serialize(const KvDoc& doc) {
  std::ostringstream os;
  for (const auto& [k, v] : doc.root) {
    os << k << " = ";
    write_value(os, v);
    os << '\n';
  }
  for (const auto& sec : doc.sections) {
    os << "\n[[" << sec.name << "]]\n";
    for (const auto& [k, v] : sec.entries) {
      os << k << " = ";
      write_value(os, v);
      os << '\n';
    }
  }
  return os.str();
}

void kv_write_file(const KvDoc& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << kv_serialize(doc);
}

const std::string& KvDoc::get_str(const std::string& key) const {
  auto it = root.find(key);
  if (it == root.end()) throw ParseError("missing key: " + key);
  if (it->second.type != KvValue::Type::Str) throw ParseError("key is not a string: " + key);
  return it->second.str;
}

std::string KvDoc::get_str_or(const std::string& key, const std::string& dflt) const {
  auto it = root.find(key);
  if (it == root.end()) return dflt;
  if (it->second.type != KvValue::Type::Str) throw ParseError("key is not a string: " + key);
  return it->second.str;
}

double KvDoc::get_num(const std::string& key) const {
  auto it = root.find(key);
  if (it == root.end()) throw ParseError("missing key: " + key);
  if (it->second.type != KvValue::Type::Num) throw ParseError("key is not a number: " + key);
  return it->second.num;
}

double KvDoc::get_num_or(const std::string& key, double dflt) const {
  auto it = root.find(key);
  if (it == root.end()) return dflt;
  if (it->second.type != KvValue::Type::Num) throw ParseError("key is not a number: " + key);
  return it->second.num;
}

long KvDoc::get_int_or(const std::string& key, long dflt) const {
  double n = get_num_or(key, double(dflt));
  if (n != std::floor(n)) throw ParseError("key is not an integer: " + key);
  return long(n);
}

bool KvDoc::get_bool_or(const std::string& key, bool dflt) const {
  auto it = root.find(key);
  if (it == root.end()) return dflt;
  if (it->second.type != KvValue::Type::Bool) throw ParseError("key is not a bool: " + key);
  return it->second.boolean;
}

std::vector<std::string> KvDoc::get_list_or(const std::string& key,
                                            std::vector<std::string> dflt) const {
  auto it = root.find(key);
  if (it == root.end()) return dflt;
  if (it->second.type != KvValue::Type::StrList) throw ParseError("key is not a list: " + key);
  return it->second.list;
}

}  // namespace selfverify
