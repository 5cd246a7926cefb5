#include "tcohom/realexpr.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

namespace tcohom {

bool is_perfect_square(long long d) {
    if (d < 0) return false;
    long long r = static_cast<long long>(std::sqrt(static_cast<double>(d)));
    for (long long k = r > 1 ? r - 1 : 0; k <= r + 1; ++k)
        if (k * k == d) return true;
    return false;
}

RealExpr::RealExpr(Rational r) : v_(r) {
    if (r.den <= 0) throw ParseError("rational denominator must be positive");
}

RealExpr::RealExpr(QuadraticIrrational q) : v_(q) {
    if (q.a_den <= 0 || q.b_den <= 0) throw ParseError("quadratic denominators must be positive");
    if (q.b_num == 0) throw ParseError("quadratic irrational requires b != 0");
    if (q.d <= 1 || is_perfect_square(q.d)) throw ParseError("quadratic irrational requires d > 1 and not a perfect square");
}

RealExpr::RealExpr(Decimal d) : v_(std::move(d)) {
    const auto& dd = std::get<Decimal>(v_);
    if (dd.digits.empty()) throw ParseError("empty decimal literal");
    if (dd.precision == 0) throw ParseError("decimal precision must be positive");
}

RealExpr::RealExpr(LiouvilleSeries l) : v_(std::move(l)) {
    const auto& ll = std::get<LiouvilleSeries>(v_);
    if (ll.base < 2) throw ParseError("liouville base must be >= 2");
    if (ll.truncation == 0) throw ParseError("liouville truncation must be positive");
    if (!ll.factorial) {
        if (ll.exponents.empty()) throw ParseError("explicit liouville exponent list must be nonempty");
        for (size_t i = 1; i < ll.exponents.size(); ++i)
            if (ll.exponents[i] <= ll.exponents[i - 1]) throw ParseError("liouville exponents must be strictly increasing");
    }
}

Real RealExpr::evaluate(mpfr_prec_t prec) const {
    if (auto* r = std::get_if<Rational>(&v_)) {
        return Real(static_cast<long>(r->num), prec) / Real(static_cast<long>(r->den), prec);
    }
    if (auto* q = std::get_if<QuadraticIrrational>(&v_)) {
        Real a = Real(static_cast<long>(q->a_num), prec) / Real(static_cast<long>(q->a_den), prec);
        Real b = Real(static_cast<long>(q->b_num), prec) / Real(static_cast<long>(q->b_den), prec);
        return a + b * Real::sqrt_ui(static_cast<unsigned long>(q->d), prec);
    }
    if (auto* d = std::get_if<Decimal>(&v_)) {
        return Real::from_string(d->digits, prec);
    }
    const auto& l = std::get<LiouvilleSeries>(v_);
    Real sum(prec);
    Real base(static_cast<long>(l.base), prec);
    long long e = 0;
    for (unsigned k = 1; k <= l.truncation; ++k) {
        long long ek;
        if (l.factorial) {
            e = (k == 1) ? 1 : e * static_cast<long long>(k);  // k!
            ek = e;
        } else {
            if (k > l.exponents.size()) break;
            ek = l.exponents[k - 1];
        }
        // base^(-ek); below-precision terms underflow towards zero harmlessly
        Real term(1.0, prec);
        mpfr_pow_si(term.raw(), base.raw(), static_cast<long>(-ek), MPFR_RNDN);
        sum = sum + term;
    }
    return sum;
}

bool RealExpr::is_exact() const {
    return std::holds_alternative<Rational>(v_) || std::holds_alternative<QuadraticIrrational>(v_);
}

bool RealExpr::operator==(const RealExpr& o) const {
    if (v_.index() != o.v_.index()) return false;
    if (auto* r = std::get_if<Rational>(&v_)) {
        auto* s = std::get_if<Rational>(&o.v_);
        return r->num * s->den == s->num * r->den;
    }
    if (auto* q = std::get_if<QuadraticIrrational>(&v_)) {
        auto* s = std::get_if<QuadraticIrrational>(&o.v_);
        return q->d == s->d && q->a_num * s->a_den == s->a_num * q->a_den &&
               q->b_num * s->b_den == s->b_num * q->b_den;
    }
    if (auto* d = std::get_if<Decimal>(&v_)) {
        auto* s = std::get_if<Decimal>(&o.v_);
        return d->digits == s->digits && d->precision == s->precision;
    }
    const auto& l = std::get<LiouvilleSeries>(v_);
    const auto& s = std::get<LiouvilleSeries>(o.v_);
    return l.base == s.base && l.factorial == s.factorial && l.truncation == s.truncation &&
           l.exponents == s.exponents;
}

std::string RealExpr::describe() const {
    std::ostringstream os;
    if (auto* r = std::get_if<Rational>(&v_)) {
        os << r->num << "/" << r->den;
    } else if (auto* q = std::get_if<QuadraticIrrational>(&v_)) {
        os << q->a_num << "/" << q->a_den << " + " << q->b_num << "/" << q->b_den << "*sqrt(" << q->d << ")";
    } else if (auto* d = std::get_if<Decimal>(&v_)) {
        os << d->digits << " (" << d->precision << " digits)";
    } else {
        const auto& l = std::get<LiouvilleSeries>(v_);
        os << "sum " << l.base << "^-e_k, " << (l.factorial ? "e_k = k!" : "explicit exponents")
           << ", " << l.truncation << " terms";
    }
    return os.str();
}

}  // namespace tcohom
