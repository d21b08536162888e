#include "kernlyap/rational_polynomial.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace kernlyap {

RationalPolynomial::RationalPolynomial(std::vector<Rational> coeffs)
    : coeffs_(std::move(coeffs)) {
  trim();
}

RationalPolynomial::RationalPolynomial(std::initializer_list<Rational> coeffs)
    : coeffs_(coeffs) {
  trim();
}

void RationalPolynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

RationalPolynomial RationalPolynomial::binomial_power(const Rational& a,
                                                      const Rational& b,
                                                      unsigned n) {
  RationalPolynomial result{Rational(1)};
  const RationalPolynomial factor{a, b};
  for (unsigned i = 0; i < n; ++i) result = result * factor;
  return result;
}

Rational RationalPolynomial::coefficient(std::size_t i) const {
  return i < coeffs_.size() ? coeffs_[i] : Rational(0);
}

Rational RationalPolynomial::operator()(const Rational& r) const {
  Rational acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * r + *it;
  return acc;
}

RationalPolynomial RationalPolynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<Rational> out(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) out[i - 1] = coeffs_[i] * i;
  return RationalPolynomial(std::move(out));
}

RationalPolynomial RationalPolynomial::antiderivative() const {
  std::vector<Rational> out(coeffs_.size() + 1);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i + 1] = coeffs_[i] / Rational(i + 1);
  return RationalPolynomial(std::move(out));
}

RationalPolynomial RationalPolynomial::divide_by_r() const {
  if (coeffs_.empty()) return {};
  if (coeffs_.front() != 0) {
    throw std::domain_error("polynomial has nonzero constant term, not divisible by r");
  }
  return RationalPolynomial(std::vector<Rational>(coeffs_.begin() + 1, coeffs_.end()));
}

RationalPolynomial RationalPolynomial::reflect_about_one() const {
  // Horner in polynomial arithmetic: p(1-u) = c0 + (1-u)(c1 + (1-u)(...)).
  const RationalPolynomial one_minus_u{Rational(1), Rational(-1)};
  RationalPolynomial acc;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc = acc * one_minus_u;
    std::vector<Rational> c = acc.coeffs_;
    if (c.empty()) c.resize(1);
    c[0] += *it;
    acc = RationalPolynomial(std::move(c));
  }
  return acc;
}

RationalPolynomial RationalPolynomial::operator*(const RationalPolynomial& rhs) const {
  if (is_zero() || rhs.is_zero()) return {};
  std::vector<Rational> out(coeffs_.size() + rhs.coeffs_.size() - 1);
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) out[i + j] += coeffs_[i] * rhs.coeffs_[j];
  return RationalPolynomial(std::move(out));
}

RationalPolynomial RationalPolynomial::operator-(const RationalPolynomial& rhs) const {
  std::vector<Rational> out(std::max(coeffs_.size(), rhs.coeffs_.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = coefficient(i) - rhs.coefficient(i);
  return RationalPolynomial(std::move(out));
}

RationalPolynomial RationalPolynomial::operator-() const { return RationalPolynomial{} - *this; }

std::vector<double> RationalPolynomial::to_double() const {
  std::vector<double> out;
  out.reserve(coeffs_.size());
  for (const auto& c : coeffs_) out.push_back(static_cast<double>(c));
  return out;
}

std::string RationalPolynomial::to_string() const {
  if (coeffs_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] == 0) continue;
    if (!first) os << " + ";
    os << "(" << coeffs_[i] << ")";
    if (i > 0) os << " r^" << i;
    first = false;
  }
  return os.str();
}

}  // namespace kernlyap
