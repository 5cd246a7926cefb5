#pragma once

#include "tcohom/real.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tcohom {

struct TcohomError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidLatticeError : TcohomError { using TcohomError::TcohomError; };
struct ParseError : TcohomError { using TcohomError::TcohomError; };
struct TruncationOverflowError : TcohomError { using TcohomError::TcohomError; };
struct RankToleranceError : TcohomError { using TcohomError::TcohomError; };
struct PreconditionError : TcohomError { using TcohomError::TcohomError; };

// Exact or approximately-given real number. The four variants cover the inputs
// the engine certifies (rationals, quadratic irrationals) and the ones it can
// only ever evaluate (decimal literals, truncated Liouville-type series).
class RealExpr {
  public:
    struct Rational {
        long long num = 0;
        long long den = 1;  // > 0
    };
    struct QuadraticIrrational {
        // (a_num/a_den) + (b_num/b_den)*sqrt(d), d square-free, b != 0
        long long a_num = 0, a_den = 1;
        long long b_num = 1, b_den = 1;
        long long d = 2;
    };
    struct Decimal {
        std::string digits;   // parseable decimal literal, e.g. "3.14159"
        unsigned precision;   // significant decimal digits the string is good for
    };
    struct LiouvilleSeries {
        long long base = 10;                  // >= 2
        std::vector<long long> exponents;     // strictly increasing; empty means factorial
        bool factorial = true;
        unsigned truncation = 6;              // number of terms kept
    };

    RealExpr() : v_(Rational{0, 1}) {}
    explicit RealExpr(Rational r);
    explicit RealExpr(QuadraticIrrational q);
    explicit RealExpr(Decimal d);
    explicit RealExpr(LiouvilleSeries l);

    static RealExpr rational(long long num, long long den) { return RealExpr(Rational{num, den}); }
    static RealExpr quadratic(long long an, long long ad, long long bn, long long bd, long long d) {
        return RealExpr(QuadraticIrrational{an, ad, bn, bd, d});
    }
    static RealExpr sqrt_of(long long d) { return quadratic(0, 1, 1, 1, d); }
    static RealExpr decimal(std::string digits, unsigned precision) { return RealExpr(Decimal{std::move(digits), precision}); }
    static RealExpr liouville_factorial(long long base, unsigned trunc) {
        return RealExpr(LiouvilleSeries{base, {}, true, trunc});
    }

    // Monotone in prec: extending precision never changes already-agreed digits.
    Real evaluate(mpfr_prec_t prec) const;
    double to_double() const { return evaluate(128).to_double(); }

    // Exactness: true value is known, not a stand-in finite approximation.
    bool is_exact() const;
    // Decidably rational. For Decimal/LiouvilleSeries the stored value is a finite
    // approximation standing in for a (possibly irrational) target; they report
    // false here and false for is_exact().
    bool is_rational() const { return std::holds_alternative<Rational>(v_) || is_rational_quadratic(); }

    const Rational* as_rational() const { return std::get_if<Rational>(&v_); }
    const QuadraticIrrational* as_quadratic() const { return std::get_if<QuadraticIrrational>(&v_); }
    const Decimal* as_decimal() const { return std::get_if<Decimal>(&v_); }
    const LiouvilleSeries* as_liouville() const { return std::get_if<LiouvilleSeries>(&v_); }

    bool operator==(const RealExpr& o) const;
    std::string describe() const;

  private:
    bool is_rational_quadratic() const { return false; }  // invariant: b != 0
    std::variant<Rational, QuadraticIrrational, Decimal, LiouvilleSeries> v_;
};

bool is_perfect_square(long long d);

}  // namespace tcohom
