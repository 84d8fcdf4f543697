#pragma once

// Tokenizer shared by the schema and ASG parsers.

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sgmon/error.hpp"

namespace sgmon::detail {

enum class TokenKind { Ident, Number, String, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  SourceLocation where;
};

inline bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

inline bool is_digit(char c) {
  return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  std::size_t line = 1;
  std::size_t col = 1;

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

  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }

    Token tok;
    tok.where = {line, col};
    const std::size_t start = i;

    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      tok.kind = TokenKind::Ident;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (is_digit(c) ||
               (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      std::size_t j = i;
      while (j < src.size() && is_digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && is_digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && is_digit(src[k])) {
          while (k < src.size() && is_digit(src[k])) ++k;
          j = k;
        } else {
          throw Error(ErrorKind::Parse, "malformed exponent in number",
                      tok.where);
        }
      }
      tok.kind = TokenKind::Number;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '"') {
      std::size_t j = i + 1;
      std::string text;
      bool closed = false;
      while (j < src.size()) {
        const char d = src[j];
        if (d == '\n') break;
        if (d == '"') {
          closed = true;
          break;
        }
        if (d == '\\') {
          if (j + 1 >= src.size()) break;
          const char e = src[j + 1];
          if (e != '"' && e != '\\') {
            throw Error(ErrorKind::Parse, "unsupported escape sequence",
                        SourceLocation{line, col + (j - start)});
          }
          text += e;
          j += 2;
          continue;
        }
        text += d;
        ++j;
      }
      if (!closed) {
        throw Error(ErrorKind::Parse, "unterminated string literal", tok.where);
      }
      tok.kind = TokenKind::String;
      tok.text = std::move(text);
      advance(j + 1 - i);
    } else {
      static constexpr std::string_view two_char[] = {"->", "==", "!=", "<=",
                                                      ">=", "&&"};
      std::string_view rest = src.substr(i);
      bool matched = false;
      for (auto op : two_char) {
        if (rest.substr(0, 2) == op) {
          tok.kind = TokenKind::Punct;
          tok.text = std::string(op);
          advance(2);
          matched = true;
          break;
        }
      }
      if (!matched) {
        static constexpr std::string_view singles = "{}()[];:,.<>=-";
        if (singles.find(c) == std::string_view::npos) {
          std::string shown = std::isprint(static_cast<unsigned char>(c))
                                  ? std::string(1, c)
                                  : "\\x" + std::to_string(
                                                static_cast<unsigned char>(c));
          throw Error(ErrorKind::Parse, "unexpected character '" + shown + "'",
                      tok.where);
        }
        tok.kind = TokenKind::Punct;
        tok.text = std::string(1, c);
        advance(1);
      }
    }
    out.push_back(std::move(tok));
  }

  Token end;
  end.kind = TokenKind::End;
  end.where = {line, col};
  out.push_back(end);
  return out;
}

/// Cursor over a token vector with the usual expect/accept helpers.
class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t idx = pos_ + ahead;
    return idx < tokens_.size() ? tokens_[idx] : tokens_.back();
  }

  const Token& next() {
    const Token& tok = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return tok;
  }

  bool at_end() const { return peek().kind == TokenKind::End; }

  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    const Token& tok = peek(ahead);
    return tok.kind == TokenKind::Punct && tok.text == p;
  }

  bool is_keyword(std::string_view kw, std::size_t ahead = 0) const {
    const Token& tok = peek(ahead);
    return tok.kind == TokenKind::Ident && tok.text == kw;
  }

  bool accept_punct(std::string_view p) {
    if (!is_punct(p)) return false;
    next();
    return true;
  }

  bool accept_keyword(std::string_view kw) {
    if (!is_keyword(kw)) return false;
    next();
    return true;
  }

  const Token& expect_punct(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
    return next();
  }

  void expect_keyword(std::string_view kw) {
    if (!is_keyword(kw)) fail("expected '" + std::string(kw) + "'");
    next();
  }

  const Token& expect_ident(std::string_view what) {
    if (peek().kind != TokenKind::Ident) fail("expected " + std::string(what));
    return next();
  }

  [[noreturn]] void fail(const std::string& message) const {
    const Token& tok = peek();
    std::string found = tok.kind == TokenKind::End ? "end of input"
                                                   : "'" + tok.text + "'";
    throw Error(ErrorKind::Parse, message + ", found " + found, tok.where);
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace sgmon::detail
