#include <cctype>
#include <sstream>

#include "stepwise/surface.hpp"

namespace stepwise {

namespace {

std::string describe(const std::string& message, SourcePos pos,
                     const std::set<std::string>& expected) {
  std::ostringstream out;
  out << pos.line << ':' << pos.column << ": " << message;
  if (!expected.empty()) {
    out << " (expected ";
    bool first = true;
    for (const auto& e : expected) {
      if (!first) out << ", ";
      out << e;
      first = false;
    }
    out << ')';
  }
  return out.str();
}

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "THEOREM", "ASSUME",  "PROVE",   "NEW",  "DEFINE", "PROOF",  "OBVIOUS",
      "OMITTED", "BY",      "USE",     "HIDE", "DEF",    "DEFS",   "SUFFICES",
      "TAKE",    "WITNESS", "HAVE",    "PICK", "CASE",   "QED",    "SUBSET",
      "TRUE",    "FALSE",   "LAMBDA"};
  return k;
}

// Backslash words with their canonical symbol spelling.
const std::pair<const char*, const char*> kBackslashWords[] = {
    {"A", "\\A"},           {"E", "\\E"},         {"in", "\\in"},     {"notin", "\\notin"},
    {"subseteq", "\\subseteq"}, {"land", "/\\"},  {"lor", "\\/"},     {"lnot", "~"},
    {"neg", "~"},           {"equiv", "<=>"},     {"forall", "\\A"},  {"exists", "\\E"},
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

ParseError::ParseError(SourcePos pos, std::string message, std::set<std::string> expected)
    : std::runtime_error(describe(message, pos, expected)),
      pos_(pos),
      detail_(std::move(message)),
      expected_(std::move(expected)) {}

std::string StepToken::text() const { return "<" + std::to_string(level) + ">" + label; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto starts = [&](std::string_view s) { return src.substr(i, s.size()) == s; };

  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (starts("\\*")) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (starts("(*")) {
      SourcePos start{line, col};
      advance(2);
      while (i < src.size() && !starts("*)")) advance(1);
      if (i >= src.size()) throw ParseError(start, "unterminated comment");
      advance(2);
      continue;
    }

    Token tok;
    tok.pos = {line, col};

    if (c == '<' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1]))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '>') {
        tok.kind = TokenKind::Step;
        tok.level = std::stoi(std::string(src.substr(i + 1, j - i - 1)));
        std::size_t k = j + 1;
        while (k < src.size() && ident_char(src[k])) ++k;
        tok.label = std::string(src.substr(j + 1, k - j - 1));
        tok.dotted = k < src.size() && src[k] == '.';
        if (tok.dotted) ++k;
        tok.text = "<" + std::to_string(tok.level) + ">" + tok.label;
        if (tok.level == 0) throw ParseError(tok.pos, "step level 0 is reserved");
        advance(k - i);
        out.push_back(std::move(tok));
        continue;
      }
    }

    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      tok.text = std::string(src.substr(i, j - i));
      tok.kind = keywords().count(tok.text) ? TokenKind::Keyword : TokenKind::Ident;
      if (tok.text == "DEFS") tok.text = "DEF";
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }

    if (c == '\\' && i + 1 < src.size() && std::isalpha(static_cast<unsigned char>(src[i + 1]))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isalpha(static_cast<unsigned char>(src[j]))) ++j;
      std::string word(src.substr(i + 1, j - i - 1));
      const char* canon = nullptr;
      for (const auto& [w, s] : kBackslashWords)
        if (word == w) canon = s;
      if (!canon) throw ParseError(tok.pos, "unknown operator \\" + word);
      tok.kind = TokenKind::Symbol;
      tok.text = canon;
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }

    static const char* kSymbols[] = {"<=>", "==", "=>", "->", "/\\", "\\/", "/=", "(", ")",
                                      "[",   "]",  "{",  "}",  ",",   ":",   "=",  "#",  "~",
                                      "."};
    bool matched = false;
    for (const char* s : kSymbols) {
      if (starts(s)) {
        tok.kind = TokenKind::Symbol;
        tok.text = s;
        if (tok.text == "/=") tok.text = "#";
        advance(std::string_view(s).size());
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(tok.pos, std::string("unexpected character '") + c + "'");
    out.push_back(std::move(tok));
  }

  Token end;
  end.kind = TokenKind::End;
  end.text = "<end of input>";
  end.pos = {line, col};
  out.push_back(std::move(end));
  return out;
}

}  // namespace stepwise
