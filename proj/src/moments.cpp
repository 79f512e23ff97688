#include "gcmc/moments.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

#include "gcmc/errors.hpp"

namespace gcmc {

MomentMonomial MomentMonomial::ratio(int index, int exp) {
  if (index < 1) throw InvalidArgument("ratio index must be >= 1");
  if (exp < 0) throw InvalidArgument("ratio exponent must be >= 0");
  MomentMonomial m;
  if (exp > 0) {
    m.exps_.assign(index, 0);
    m.exps_[index - 1] = exp;
  }
  return m;
}

int MomentMonomial::exponent(int index) const {
  if (index < 1 || index > static_cast<int>(exps_.size())) return 0;
  return exps_[index - 1];
}

int MomentMonomial::max_index() const { return static_cast<int>(exps_.size()); }

int MomentMonomial::weight() const {
  int w = 0;
  for (int i = 0; i < static_cast<int>(exps_.size()); ++i) w += (i + 1) * exps_[i];
  return w;
}

int MomentMonomial::degree() const {
  int d = 0;
  for (int e : exps_) d += e;
  return d;
}

bool MomentMonomial::even_exponents() const {
  for (int e : exps_)
    if (e % 2 != 0) return false;
  return true;
}

MomentMonomial MomentMonomial::times(const MomentMonomial& other) const {
  MomentMonomial out;
  out.exps_.resize(std::max(exps_.size(), other.exps_.size()), 0);
  for (std::size_t i = 0; i < exps_.size(); ++i) out.exps_[i] += exps_[i];
  for (std::size_t i = 0; i < other.exps_.size(); ++i) out.exps_[i] += other.exps_[i];
  return out;
}

MomentMonomial MomentMonomial::times_ratio(int index, int exp) const {
  return times(ratio(index, exp));
}

MomentMonomial MomentMonomial::divide_ratio(int index) const {
  if (exponent(index) < 1)
    throw InvalidArgument("divide_ratio: monomial has no factor r" + std::to_string(index));
  MomentMonomial out = *this;
  out.exps_[index - 1] -= 1;
  while (!out.exps_.empty() && out.exps_.back() == 0) out.exps_.pop_back();
  return out;
}

std::strong_ordering MomentMonomial::operator<=>(const MomentMonomial& other) const {
  if (auto c = weight() <=> other.weight(); c != 0) return c;
  int top = std::max(max_index(), other.max_index());
  for (int i = top; i >= 1; --i)
    if (auto c = exponent(i) <=> other.exponent(i); c != 0) return c;
  return std::strong_ordering::equal;
}

std::string MomentMonomial::str() const {
  if (is_one()) return "1";
  std::string s;
  for (int i = max_index(); i >= 1; --i) {
    int e = exponent(i);
    if (e == 0) continue;
    if (!s.empty()) s += "*";
    s += "r" + std::to_string(i);
    if (e > 1) s += "^" + std::to_string(e);
  }
  return s;
}

MomentExpr MomentExpr::term(const Rational& c, const MomentMonomial& m) {
  MomentExpr e;
  e.add_term(m, c);
  return e;
}

MomentExpr MomentExpr::one() { return term(1, MomentMonomial()); }

Rational MomentExpr::coefficient(const MomentMonomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

void MomentExpr::add_term(const MomentMonomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

MomentExpr& MomentExpr::operator+=(const MomentExpr& other) {
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

MomentExpr& MomentExpr::operator-=(const MomentExpr& other) {
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

MomentExpr& MomentExpr::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, coeff] : terms_) coeff *= c;
  return *this;
}

MomentExpr MomentExpr::times(const MomentExpr& other) const {
  MomentExpr out;
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : other.terms_) out.add_term(ma.times(mb), ca * cb);
  return out;
}

bool MomentExpr::homogeneous() const {
  if (terms_.empty()) return true;
  int w = terms_.begin()->first.weight();
  for (const auto& [m, c] : terms_)
    if (m.weight() != w) return false;
  return true;
}

int MomentExpr::weight() const {
  if (terms_.empty()) return 0;
  return terms_.begin()->first.weight();
}

int MomentExpr::max_index() const {
  int top = 0;
  for (const auto& [m, c] : terms_) top = std::max(top, m.max_index());
  return top;
}

Rational MomentExpr::l1_norm() const {
  Rational s = 0;
  for (const auto& [m, c] : terms_) s += abs(c);
  return s;
}

std::string MomentExpr::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  // descending monomial order
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const Rational& c = it->second;
    bool neg = c < 0;
    Rational a = abs(c);
    if (s.empty())
      s += neg ? "-" : "";
    else
      s += neg ? " - " : " + ";
    if (a != 1) s += rational_str(a) + "*";
    s += "E[" + it->first.str() + "]";
  }
  return s;
}

namespace {

// E[prod r_i^{a_i}] = integral of prod f_i^{a_i} / f^{deg-1}.
std::string paper_term(const MomentMonomial& m) {
  if (m.is_one()) return "f";
  std::string num;
  for (int i = m.max_index(); i >= 1; --i) {
    int e = m.exponent(i);
    if (e == 0) continue;
    if (!num.empty()) num += "*";
    num += "f" + std::to_string(i);
    if (e > 1) num += "^" + std::to_string(e);
  }
  int k = m.degree() - 1;
  if (k == 0) return num;
  if (k == 1) return num + "/f";
  return num + "/f^" + std::to_string(k);
}

}  // namespace

std::string MomentExpr::paper_str() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const Rational& c = it->second;
    bool neg = c < 0;
    Rational a = abs(c);
    if (s.empty())
      s += neg ? "-" : "";
    else
      s += neg ? " - " : " + ";
    if (a != 1) s += rational_str(a) + "*";
    s += "int " + paper_term(it->first) + " dy";
  }
  return s;
}

namespace {

struct Cursor {
  const std::string& s;
  std::size_t i = 0;

  void skip_ws() {
    while (i < s.size() && isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool done() {
    skip_ws();
    return i >= s.size();
  }
  char peek() {
    skip_ws();
    return i < s.size() ? s[i] : '\0';
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c))
      throw ParseError("expected '" + std::string(1, c) + "' at offset " +
                       std::to_string(i) + " in expression");
  }
  long integer() {
    skip_ws();
    std::size_t start = i;
    while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == start) throw ParseError("expected integer at offset " + std::to_string(start));
    return std::stol(s.substr(start, i - start));
  }
};

Rational parse_coeff(Cursor& c) {
  long num = c.integer();
  long den = 1;
  if (c.eat('/')) den = c.integer();
  return make_rational(num, den);
}

MomentMonomial parse_monomial_body(Cursor& c) {
  MomentMonomial m;
  if (c.peek() == '1') {
    c.expect('1');
    return m;
  }
  while (true) {
    c.expect('r');
    long idx = c.integer();
    long exp = 1;
    if (c.eat('^')) exp = c.integer();
    m = m.times_ratio(static_cast<int>(idx), static_cast<int>(exp));
    if (!c.eat('*')) break;
  }
  return m;
}

}  // namespace

MomentExpr MomentExpr::parse(const std::string& text) {
  Cursor c{text};
  MomentExpr out;
  if (c.done()) throw ParseError("empty expression");
  if (c.peek() == '0') {
    c.expect('0');
    if (!c.done()) throw ParseError("trailing characters after '0'");
    return out;
  }
  bool negative = c.eat('-');
  if (!negative) c.eat('+');
  while (true) {
    Rational coeff = 1;
    if (isdigit(static_cast<unsigned char>(c.peek()))) {
      coeff = parse_coeff(c);
      c.expect('*');
    }
    c.expect('E');
    c.expect('[');
    MomentMonomial m = parse_monomial_body(c);
    c.expect(']');
    out.add_term(m, negative ? -coeff : coeff);
    if (c.done()) break;
    if (c.eat('+'))
      negative = false;
    else if (c.eat('-'))
      negative = true;
    else
      throw ParseError("expected '+' or '-' between terms");
  }
  return out;
}

MomentExpr parse_rho_polynomial(const std::string& text) {
  Cursor c{text};
  MomentExpr out;
  if (c.done()) throw ParseError("empty polynomial");
  if (c.peek() == '0') {
    c.expect('0');
    if (!c.done()) throw ParseError("trailing characters after '0'");
    return out;
  }
  bool negative = c.eat('-');
  if (!negative) c.eat('+');
  while (true) {
    Rational coeff = 1;
    if (isdigit(static_cast<unsigned char>(c.peek()))) {
      coeff = parse_coeff(c);
      c.expect('*');
    }
    MomentMonomial m = parse_monomial_body(c);
    out.add_term(m, negative ? -coeff : coeff);
    if (c.done()) break;
    if (c.eat('+'))
      negative = false;
    else if (c.eat('-'))
      negative = true;
    else
      throw ParseError("expected '+' or '-' between polynomial terms");
  }
  return out;
}

std::string rho_polynomial_str(const MomentExpr& e) {
  if (e.is_zero()) return "0";
  std::string s;
  const auto& terms = e.terms();
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
    const Rational& c = it->second;
    bool neg = c < 0;
    Rational a = abs(c);
    if (s.empty())
      s += neg ? "-" : "";
    else
      s += neg ? " - " : " + ";
    if (a != 1 || it->first.is_one()) s += rational_str(a);
    if (a != 1 && !it->first.is_one()) s += "*";
    if (!it->first.is_one()) s += it->first.str();
  }
  return s;
}

std::vector<MomentMonomial> monomials_of_weight(int weight) {
  if (weight < 0) throw InvalidArgument("weight must be >= 0");
  std::vector<MomentMonomial> out;
  MomentMonomial acc;
  // parts in non-increasing index order; exponent of index i counts parts i
  auto rec = [&](auto&& self, int remaining, int max_part, MomentMonomial cur) -> void {
    if (remaining == 0) {
      out.push_back(cur);
      return;
    }
    for (int part = std::min(max_part, remaining); part >= 1; --part)
      self(self, remaining - part, part, cur.times_ratio(part));
  };
  rec(rec, weight, weight, acc);
  std::sort(out.begin(), out.end());
  return out;
}

MomentExpr derive_y(const MomentExpr& e) {
  MomentExpr out;
  for (const auto& [m, c] : e.terms()) {
    for (int i = m.max_index(); i >= 1; --i) {
      int a = m.exponent(i);
      if (a == 0) continue;
      // d/dy r_i^a * rest: a * (r_{i+1} - r_1 r_i) * m / r_i
      MomentMonomial base = m.divide_ratio(i);
      out.add_term(base.times_ratio(i + 1), c * a);
      out.add_term(m.times_ratio(1), -c * a);
    }
  }
  return out;
}

MomentExpr derive_t(const MomentExpr& e) {
  const Rational half = make_rational(1, 2);
  MomentExpr out;
  for (const auto& [m, c] : e.terms()) {
    // mass term from f_t = (1/2) f_yy
    out.add_term(m.times_ratio(2), c * half);
    for (int i = m.max_index(); i >= 1; --i) {
      int a = m.exponent(i);
      if (a == 0) continue;
      // d/dt r_i = (1/2)(r_{i+2} - r_i r_2)
      MomentMonomial base = m.divide_ratio(i);
      out.add_term(base.times_ratio(i + 2), c * a * half);
      out.add_term(m.times_ratio(2), -c * a * half);
    }
  }
  return out;
}

RelationBasis::RelationBasis(int weight) : weight_(weight) {
  if (weight < 1) throw InvalidArgument("relation basis weight must be >= 1");
  // One relation per monomial of weight w-1: E[derive_y(m) + r_1 m] = 0.
  for (const MomentMonomial& m : monomials_of_weight(weight - 1)) {
    MomentExpr unit = MomentExpr::term(1, m);
    MomentExpr rel = derive_y(unit);
    rel += MomentExpr::term(1, m.times_ratio(1));
    if (!rel.is_zero()) relations_.push_back(rel);
  }

  // Incremental Gauss-Jordan keeping full reduced row-echelon form:
  // every pivot row is normalized and contains no other pivot monomial.
  struct Row {
    MomentMonomial lead;
    MomentExpr rest;  // lead + rest = 0 under E_f, i.e. E[lead] = E[-rest]
  };
  std::vector<Row> rows;

  for (const MomentExpr& rel : relations_) {
    MomentExpr r = rel;
    // substitute known pivots until the support is pivot-free
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Row& row : rows) {
        Rational c = r.coefficient(row.lead);
        if (c != 0) {
          r.add_term(row.lead, -c);
          MomentExpr sub = row.rest;
          sub *= c;
          r += sub;
          changed = true;
        }
      }
    }
    if (r.is_zero()) continue;
    MomentMonomial lead = r.terms().rbegin()->first;
    Rational lc = r.coefficient(lead);
    r.add_term(lead, -lc);
    r *= Rational(-1) / lc;  // now E[lead] = E[r]
    // eliminate the new pivot from earlier rows
    for (Row& row : rows) {
      Rational c = row.rest.coefficient(lead);
      if (c != 0) {
        row.rest.add_term(lead, -c);
        MomentExpr sub = r;
        sub *= c;
        row.rest += sub;
      }
    }
    rows.push_back(Row{lead, std::move(r)});
  }

  for (const Row& row : rows) table_.emplace(row.lead, row.rest);
  for (const MomentMonomial& m : monomials_of_weight(weight))
    if (!table_.contains(m)) standard_.push_back(m);
}

const RelationBasis& relation_basis(int weight) {
  static std::mutex mu;
  static std::map<int, RelationBasis> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(weight);
  if (it == cache.end()) it = cache.emplace(weight, RelationBasis(weight)).first;
  return it->second;
}

MomentExpr ibp_reduce(const MomentExpr& e) {
  MomentExpr out;
  for (const auto& [m, c] : e.terms()) {
    int w = m.weight();
    if (w == 0) {
      out.add_term(m, c);
      continue;
    }
    const RelationBasis& basis = relation_basis(w);
    auto it = basis.elimination_table().find(m);
    if (it == basis.elimination_table().end()) {
      out.add_term(m, c);
    } else {
      MomentExpr sub = it->second;
      sub *= c;
      out += sub;
    }
  }
  return out;
}

MomentExpr entropy_derivative(int n, int cap) {
  if (n < 1 || n > cap)
    throw OrderCapError("entropy derivative order " + std::to_string(n) +
                        " outside [1, " + std::to_string(cap) +
                        "]; the derivative cap is " + std::to_string(cap));
  static std::mutex mu;
  static std::vector<MomentExpr> cache;  // cache[k] = d^{k+1} h / dt^{k+1}
  std::scoped_lock lock(mu);
  if (cache.empty())
    cache.push_back(MomentExpr::term(make_rational(1, 2), MomentMonomial::ratio(1, 2)));
  while (static_cast<int>(cache.size()) < n)
    cache.push_back(ibp_reduce(derive_t(cache.back())));
  return cache[n - 1];
}

MomentExpr fisher_derivative(int n, int cap) {
  if (n < 0 || n > cap - 1)
    throw OrderCapError("fisher derivative order " + std::to_string(n) +
                        " outside [0, " + std::to_string(cap - 1) +
                        "]; the derivative cap is " + std::to_string(cap));
  if (n == 0) return MomentExpr::term(1, MomentMonomial::ratio(1, 2));
  MomentExpr e = entropy_derivative(n + 1, cap);
  e *= 2;
  return e;
}

MomentExpr entropy_derivative_raw(int n, int cap) {
  if (n < 1 || n > cap)
    throw OrderCapError("entropy derivative order " + std::to_string(n) +
                        " outside [1, " + std::to_string(cap) +
                        "]; the derivative cap is " + std::to_string(cap));
  static std::mutex mu;
  static std::vector<MomentExpr> cache;
  std::scoped_lock lock(mu);
  if (cache.empty())
    cache.push_back(MomentExpr::term(make_rational(1, 2), MomentMonomial::ratio(1, 2)));
  while (static_cast<int>(cache.size()) < n)
    cache.push_back(derive_t(cache.back()));
  return cache[n - 1];
}

MomentExpr fisher_derivative_raw(int n, int cap) {
  if (n < 0 || n > cap - 1)
    throw OrderCapError("fisher derivative order " + std::to_string(n) +
                        " outside [0, " + std::to_string(cap - 1) +
                        "]; the derivative cap is " + std::to_string(cap));
  if (n == 0) return MomentExpr::term(1, MomentMonomial::ratio(1, 2));
  MomentExpr e = entropy_derivative_raw(n + 1, cap);
  e *= 2;
  return e;
}

}  // namespace gcmc
