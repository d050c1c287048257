// Copyright 2026 The qtmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <string_view>

#include "qtmlab/error.hpp"

namespace qtmlab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational &r) {
    return r.convert_to<double>();
}

inline std::string rational_text(const Rational &r) {
    auto num = boost::multiprecision::numerator(r);
    auto den = boost::multiprecision::denominator(r);
    if (den == 1) {
        return num.str();
    }
    return num.str() + "/" + den.str();
}

/// Parses `p/q`, an integer, or a plain decimal (`-0.125`, `3e-2`) as an exact rational.
/// Returns nullopt when the token is not of that form; throws on a zero denominator.
inline std::optional<Rational> parse_rational(std::string_view tok) {
    if (tok.empty()) {
        return std::nullopt;
    }
    auto is_int = [](std::string_view s) {
        size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
        if (i >= s.size()) {
            return false;
        }
        for (; i < s.size(); i++) {
            if (s[i] < '0' || s[i] > '9') {
                return false;
            }
        }
        return true;
    };
    auto to_int = [](std::string_view s) {
        if (!s.empty() && s[0] == '+') {
            s.remove_prefix(1);
        }
        return BigInt(std::string(s));
    };
    auto slash = tok.find('/');
    if (slash != std::string_view::npos) {
        auto p = tok.substr(0, slash);
        auto q = tok.substr(slash + 1);
        if (!is_int(p) || !is_int(q)) {
            return std::nullopt;
        }
        BigInt den = to_int(q);
        if (den == 0) {
            fail(ErrorKind::Parse, "denominator is zero in '" + std::string(tok) + "'");
        }
        return Rational(to_int(p), den);
    }
    // Decimal with optional exponent.
    std::string_view mant = tok;
    long exp10 = 0;
    auto e = tok.find_first_of("eE");
    if (e != std::string_view::npos) {
        auto es = tok.substr(e + 1);
        if (!is_int(es) || es.size() > 6) {
            return std::nullopt;
        }
        exp10 = std::stol(std::string(es));
        mant = tok.substr(0, e);
    }
    std::string digits;
    bool neg = false;
    size_t i = 0;
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
        neg = mant[0] == '-';
        i = 1;
    }
    bool seen_dot = false;
    bool seen_digit = false;
    for (; i < mant.size(); i++) {
        char c = mant[i];
        if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            digits.push_back(c);
            seen_digit = true;
            if (seen_dot) {
                exp10--;
            }
        } else {
            return std::nullopt;
        }
    }
    if (!seen_digit) {
        return std::nullopt;
    }
    // BigInt reads a leading 0 as octal.
    auto nz = digits.find_first_not_of('0');
    BigInt n(nz == std::string::npos ? std::string("0") : digits.substr(nz));
    if (neg) {
        n = -n;
    }
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(exp10 < 0 ? -exp10 : exp10));
    return exp10 < 0 ? Rational(n, scale) : Rational(n * scale);
}

/// Gaussian rational a + b i with an IEEE shadow of the exact value.
class ExactComplex {
   public:
    ExactComplex() = default;
    ExactComplex(Rational re, Rational im = 0) : re_(std::move(re)), im_(std::move(im)) {
        refresh();
    }
    ExactComplex(long re) : ExactComplex(Rational(re)) {
    }

    const Rational &re() const {
        return re_;
    }
    const Rational &im() const {
        return im_;
    }
    std::complex<double> value() const {
        return shadow_;
    }
    bool is_zero() const {
        return re_ == 0 && im_ == 0;
    }

    ExactComplex conj() const {
        return {re_, -im_};
    }
    /// |z|^2, exact.
    Rational norm() const {
        return re_ * re_ + im_ * im_;
    }

    friend ExactComplex operator+(const ExactComplex &a, const ExactComplex &b) {
        return {a.re_ + b.re_, a.im_ + b.im_};
    }
    friend ExactComplex operator-(const ExactComplex &a, const ExactComplex &b) {
        return {a.re_ - b.re_, a.im_ - b.im_};
    }
    friend ExactComplex operator-(const ExactComplex &a) {
        return {-a.re_, -a.im_};
    }
    friend ExactComplex operator*(const ExactComplex &a, const ExactComplex &b) {
        return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
    }
    friend ExactComplex operator/(const ExactComplex &a, const ExactComplex &b) {
        Rational d = b.norm();
        if (d == 0) {
            fail(ErrorKind::Validation, "division by exact zero");
        }
        ExactComplex n = a * b.conj();
        return {n.re_ / d, n.im_ / d};
    }
    ExactComplex &operator+=(const ExactComplex &o) {
        return *this = *this + o;
    }
    ExactComplex &operator-=(const ExactComplex &o) {
        return *this = *this - o;
    }
    ExactComplex &operator*=(const ExactComplex &o) {
        return *this = *this * o;
    }
    friend bool operator==(const ExactComplex &a, const ExactComplex &b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }

    std::string str() const {
        return rational_text(re_) + " " + rational_text(im_);
    }

   private:
    void refresh() {
        shadow_ = {to_double(re_), to_double(im_)};
    }

    Rational re_{0};
    Rational im_{0};
    std::complex<double> shadow_{0.0, 0.0};
};

/// Real-valued transition amplitude token. `exact` is absent for irrational
/// values such as `sqrt(1/2)`, which only the float backend accepts.
struct RealToken {
    double value = 0.0;
    std::optional<Rational> exact;
    std::string text;
};

/// Parses a rational, decimal, or `[-]sqrt(p/q)` token.
inline RealToken parse_real_token(std::string_view tok) {
    RealToken out;
    out.text = std::string(tok);
    bool neg = false;
    std::string_view body = tok;
    if (!body.empty() && body[0] == '-' && body.substr(1).starts_with("sqrt(")) {
        neg = true;
        body.remove_prefix(1);
    }
    if (body.starts_with("sqrt(") && body.ends_with(")")) {
        auto inner = parse_rational(body.substr(5, body.size() - 6));
        if (!inner || *inner < 0) {
            fail(ErrorKind::Parse, "bad sqrt argument in '" + std::string(tok) + "'");
        }
        auto num = boost::multiprecision::numerator(*inner);
        auto den = boost::multiprecision::denominator(*inner);
        BigInt rn = boost::multiprecision::sqrt(num);
        BigInt rd = boost::multiprecision::sqrt(den);
        if (rn * rn == num && rd * rd == den) {
            out.exact = Rational(neg ? BigInt(-rn) : rn, rd);
            out.value = to_double(*out.exact);
        } else {
            out.value = std::sqrt(to_double(*inner)) * (neg ? -1.0 : 1.0);
        }
        return out;
    }
    auto r = parse_rational(tok);
    if (!r) {
        fail(ErrorKind::Parse, "not a number: '" + std::string(tok) + "'");
    }
    out.exact = *r;
    out.value = to_double(*r);
    return out;
}

}  // namespace qtmlab
