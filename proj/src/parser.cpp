#include "freeconvex/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace freeconvex {

RationalExpr RationalExpr::constant(Complex c) {
  RationalExpr e;
  e.kind = Kind::Constant;
  e.value = c;
  return e;
}

RationalExpr RationalExpr::variable(int j) {
  RationalExpr e;
  e.kind = Kind::Variable;
  e.var = j;
  return e;
}

RationalExpr RationalExpr::unary(Kind kind, RationalExpr child) {
  RationalExpr e;
  e.kind = kind;
  e.span = child.span;
  e.children.push_back(std::move(child));
  return e;
}

RationalExpr RationalExpr::nary(Kind kind, std::vector<RationalExpr> children) {
  RationalExpr e;
  e.kind = kind;
  if (!children.empty()) e.span = {children.front().span.start, children.back().span.end};
  e.children = std::move(children);
  return e;
}

RationalExpr RationalExpr::matrix(int size, std::vector<RationalExpr> entries) {
  RationalExpr e;
  e.kind = Kind::Matrix;
  e.size = size;
  e.children = std::move(entries);
  return e;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  RationalExpr run() {
    skip();
    if (pos_ >= s_.size()) fail("empty expression", pos_, pos_);
    RationalExpr e = expr();
    skip();
    if (pos_ < s_.size()) fail(std::string("unexpected character '") + s_[pos_] + "'", pos_, pos_ + 1);
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg, std::size_t a, std::size_t b) const {
    a = std::min(a, s_.size());
    b = std::min(std::max(a, b), s_.size());
    throw ParseError(msg + " at offset " + std::to_string(a), {a, b});
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      std::string found = pos_ < s_.size() ? std::string("'") + s_[pos_] + "'" : std::string("end of input");
      fail(std::string("expected '") + c + "' but found " + found, pos_, pos_ + 1);
    }
  }

  RationalExpr expr() {
    skip();
    std::size_t start = pos_;
    std::vector<RationalExpr> terms;
    terms.push_back(term());
    for (;;) {
      skip();
      if (accept('+')) {
        terms.push_back(term());
      } else if (accept('-')) {
        std::size_t at = pos_ - 1;
        RationalExpr t = term();
        RationalExpr n = RationalExpr::unary(RationalExpr::Kind::Negate, std::move(t));
        n.span.start = at;
        terms.push_back(std::move(n));
      } else {
        break;
      }
    }
    if (terms.size() == 1) return std::move(terms.front());
    RationalExpr e = RationalExpr::nary(RationalExpr::Kind::Add, std::move(terms));
    e.span = {start, pos_};
    return e;
  }

  RationalExpr term() {
    skip();
    std::size_t start = pos_;
    std::vector<RationalExpr> factors;
    factors.push_back(unary());
    for (;;) {
      skip();
      if (accept('*')) {
        factors.push_back(unary());
        continue;
      }
      // Juxtaposition is not multiplication.
      if (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '(' ||
                               s_[pos_] == '[' || s_[pos_] == '.'))
        fail("missing '*' between factors", pos_, pos_ + 1);
      break;
    }
    if (factors.size() == 1) return std::move(factors.front());
    RationalExpr e = RationalExpr::nary(RationalExpr::Kind::Mul, std::move(factors));
    e.span = {start, pos_};
    return e;
  }

  RationalExpr unary() {
    skip();
    std::size_t start = pos_;
    if (accept('-')) {
      RationalExpr e = RationalExpr::unary(RationalExpr::Kind::Negate, unary());
      e.span = {start, pos_};
      return e;
    }
    if (accept('+')) return unary();
    return postfix();
  }

  RationalExpr postfix() {
    skip();
    std::size_t start = pos_;
    RationalExpr e = primary();
    while (accept('\'')) {
      e = RationalExpr::unary(RationalExpr::Kind::Adjoint, std::move(e));
      e.span = {start, pos_};
    }
    return e;
  }

  RationalExpr primary() {
    skip();
    std::size_t start = pos_;
    if (pos_ >= s_.size()) fail("unexpected end of input", pos_, pos_);
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      RationalExpr e = expr();
      expect(')');
      e.span = {start, pos_};
      return e;
    }
    if (c == '[') return matrix();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) ++end;
      std::string_view ident = s_.substr(pos_, end - pos_);
      if (ident == "i") {
        pos_ = end;
        RationalExpr e = RationalExpr::constant({0.0, 1.0});
        e.span = {start, end};
        return e;
      }
      if (ident == "inv") {
        pos_ = end;
        expect('(');
        RationalExpr inner = expr();
        expect(')');
        RationalExpr e = RationalExpr::unary(RationalExpr::Kind::Inverse, std::move(inner));
        e.span = {start, pos_};
        return e;
      }
      if (ident.size() >= 2 && ident[0] == 'x' &&
          std::all_of(ident.begin() + 1, ident.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }) &&
          ident[1] != '0') {
        int j = 0;
        auto res = std::from_chars(ident.data() + 1, ident.data() + ident.size(), j);
        if (res.ec != std::errc() || j < 1) fail("bad variable index", start, end);
        pos_ = end;
        RationalExpr e = RationalExpr::variable(j);
        e.span = {start, end};
        return e;
      }
      fail("unknown identifier '" + std::string(ident) + "'", start, end);
    }
    fail(std::string("unexpected character '") + c + "'", pos_, pos_ + 1);
  }

  RationalExpr number() {
    std::size_t start = pos_;
    std::size_t end = pos_;
    bool digits = false;
    while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end, digits = true;
    if (end < s_.size() && s_[end] == '.') {
      ++end;
      while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end, digits = true;
    }
    if (!digits) fail("malformed number", start, end);
    if (end < s_.size() && (s_[end] == 'e' || s_[end] == 'E'))
      fail("scientific notation is not supported", end, end + 1);
    double v = 0.0;
    auto res = std::from_chars(s_.data() + start, s_.data() + end, v, std::chars_format::fixed);
    if (res.ec != std::errc() || res.ptr != s_.data() + end) fail("malformed number", start, end);
    pos_ = end;
    RationalExpr e = RationalExpr::constant({v, 0.0});
    e.span = {start, end};
    return e;
  }

  RationalExpr matrix() {
    std::size_t start = pos_;
    expect('[');
    std::vector<std::vector<RationalExpr>> rows;
    std::vector<SourceSpan> row_spans;
    do {
      skip();
      std::size_t row_start = pos_;
      expect('[');
      std::vector<RationalExpr> row;
      do {
        row.push_back(expr());
      } while (accept(','));
      expect(']');
      rows.push_back(std::move(row));
      row_spans.push_back({row_start, pos_});
    } while (accept(','));
    expect(']');
    const std::size_t n = rows.size();
    for (std::size_t r = 0; r < n; ++r)
      if (rows[r].size() != n)
        fail("non-square matrix literal: row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                 " entries, expected " + std::to_string(n),
             row_spans[r].start, row_spans[r].end);
    std::vector<RationalExpr> entries;
    for (auto& row : rows)
      for (auto& e : row) entries.push_back(std::move(e));
    RationalExpr e = RationalExpr::matrix(static_cast<int>(n), std::move(entries));
    e.span = {start, pos_};
    return e;
  }
};

}  // namespace

RationalExpr parse(std::string_view text) { return Parser(text).run(); }

int max_variable(const RationalExpr& e) {
  int m = e.kind == RationalExpr::Kind::Variable ? e.var : 0;
  for (const auto& c : e.children) m = std::max(m, max_variable(c));
  return m;
}

bool contains_inverse(const RationalExpr& e) {
  if (e.kind == RationalExpr::Kind::Inverse) return true;
  return std::any_of(e.children.begin(), e.children.end(), [](const RationalExpr& c) { return contains_inverse(c); });
}

int expression_size(const RationalExpr& e) {
  using K = RationalExpr::Kind;
  switch (e.kind) {
    case K::Constant:
    case K::Variable: return 1;
    case K::Matrix:
      for (const auto& c : e.children)
        if (expression_size(c) != 1)
          throw Error(ErrorKind::DimensionMismatch, "matrix literal entries must be scalar");
      return e.size;
    case K::Adjoint:
    case K::Negate:
    case K::Inverse: return expression_size(e.children.front());
    case K::Add:
    case K::Mul: {
      int size = 1;
      for (const auto& c : e.children) {
        int s = expression_size(c);
        if (s == 1) continue;
        if (size != 1 && size != s)
          throw Error(ErrorKind::DimensionMismatch,
                      "operands of sizes " + std::to_string(size) + " and " + std::to_string(s) + " cannot combine");
        size = s;
      }
      return size;
    }
  }
  return 1;
}

namespace {

NcPoly lower(const RationalExpr& e, int g) {
  using K = RationalExpr::Kind;
  switch (e.kind) {
    case K::Constant: return NcPoly::scalar(e.value, g);
    case K::Variable: return NcPoly::variable(e.var, false, g);
    case K::Adjoint: return adjoint(lower(e.children.front(), g));
    case K::Negate: return -lower(e.children.front(), g);
    case K::Inverse:
      throw Error(ErrorKind::RationalNotPolynomial,
                  "expression contains inv(...) at offset " + std::to_string(e.span.start));
    case K::Matrix: {
      const int n = e.size;
      NcPoly out(n, g);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          NcPoly entry = lower(e.children[r * n + c], g);
          if (entry.delta() != 1) throw Error(ErrorKind::DimensionMismatch, "matrix literal entries must be scalar");
          for (const auto& [w, coeff] : entry.terms()) {
            Matrix m = Matrix::Zero(n, n);
            m(r, c) = coeff(0, 0);
            out.add_term(w, m);
          }
        }
      return out;
    }
    case K::Add:
    case K::Mul: {
      std::vector<NcPoly> parts;
      int size = 1;
      for (const auto& c : e.children) {
        parts.push_back(lower(c, g));
        size = std::max(size, parts.back().delta());
      }
      for (auto& p : parts)
        if (p.delta() != size) {
          if (p.delta() != 1) throw Error(ErrorKind::DimensionMismatch, "operand sizes do not match");
          p = broadcast(p, size);
        }
      NcPoly acc = parts.front();
      for (std::size_t k = 1; k < parts.size(); ++k) acc = e.kind == K::Add ? acc + parts[k] : acc * parts[k];
      return acc;
    }
  }
  return NcPoly(1, g);
}

void append_word(std::ostringstream& os, const Word& w) {
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (k) os << '*';
    os << 'x' << w[k].var;
    if (w[k].starred) os << '\'';
  }
}

// Scalar polynomial text from (word, coefficient) pairs in canonical order.
std::string format_scalar(const std::vector<std::pair<Word, Complex>>& terms) {
  if (terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [w, c] : terms) {
    const double re = c.real(), im = c.imag();
    bool negative = false;
    std::string mag;  // coefficient text without leading sign; empty means unit
    if (im == 0.0) {
      negative = std::signbit(re);
      double a = std::abs(re);
      if (!(a == 1.0 && !w.empty())) mag = format_number(a);
    } else if (re == 0.0) {
      negative = std::signbit(im);
      double a = std::abs(im);
      mag = a == 1.0 ? "i" : format_number(a) + "*i";
    } else {
      mag = "(" + format_number(re) + (std::signbit(im) ? " - " : " + ") +
            (std::abs(im) == 1.0 ? std::string("i") : format_number(std::abs(im)) + "*i") + ")";
    }
    if (first) os << (negative ? "-" : "");
    else os << (negative ? " - " : " + ");
    first = false;
    os << mag;
    if (!w.empty()) {
      if (!mag.empty()) os << '*';
      append_word(os, w);
    }
  }
  return os.str();
}

}  // namespace

NcPoly to_polynomial(const RationalExpr& e, int g) {
  const int needed = std::max(1, max_variable(e));
  if (g == 0) g = needed;
  if (g < max_variable(e))
    throw Error(ErrorKind::DimensionMismatch, "variable count " + std::to_string(g) + " is smaller than largest index " +
                                                  std::to_string(max_variable(e)));
  if (contains_inverse(e))
    throw Error(ErrorKind::RationalNotPolynomial, "expression contains inv(...); it is rational, not polynomial");
  expression_size(e);
  return lower(e, g);
}

std::string format_number(double x) {
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed);
  std::string out(buf, res.ptr);
  if (out == "-0") out = "0";
  return out;
}

std::string format(const NcPoly& p) {
  if (p.delta() == 1) {
    std::vector<std::pair<Word, Complex>> terms;
    for (const auto& [w, c] : p.terms()) terms.emplace_back(w, c(0, 0));
    return format_scalar(terms);
  }
  const int n = p.delta();
  std::ostringstream os;
  os << '[';
  for (int r = 0; r < n; ++r) {
    if (r) os << ", ";
    os << '[';
    for (int c = 0; c < n; ++c) {
      if (c) os << ", ";
      std::vector<std::pair<Word, Complex>> terms;
      for (const auto& [w, m] : p.terms())
        if (m(r, c) != Complex(0.0, 0.0)) terms.emplace_back(w, m(r, c));
      os << format_scalar(terms);
    }
    os << ']';
  }
  os << ']';
  return os.str();
}

}  // namespace freeconvex
