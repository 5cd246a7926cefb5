#pragma once

#include <mpfr.h>
#include <gmp.h>

#include <cstdint>
#include <string>
#include <utility>

namespace tcohom {

// Thin RAII wrapper over mpfr_t with runtime precision (bits of significand).
// Rounding is always MPFR_RNDN. Precision propagates as max of the operands.
class Real {
  public:
    explicit Real(mpfr_prec_t prec = 128) { mpfr_init2(x_, prec < MPFR_PREC_MIN ? MPFR_PREC_MIN : prec); mpfr_set_zero(x_, 1); }
    Real(double v, mpfr_prec_t prec) : Real(prec) { mpfr_set_d(x_, v, MPFR_RNDN); }
    Real(long v, mpfr_prec_t prec) : Real(prec) { mpfr_set_si(x_, v, MPFR_RNDN); }
    Real(const Real& o) : Real(o.prec()) { mpfr_set(x_, o.x_, MPFR_RNDN); }
    Real(Real&& o) noexcept { mpfr_init2(x_, o.prec()); mpfr_swap(x_, o.x_); }
    Real& operator=(const Real& o) {
        if (this != &o) { mpfr_set_prec(x_, o.prec()); mpfr_set(x_, o.x_, MPFR_RNDN); }
        return *this;
    }
    Real& operator=(Real&& o) noexcept { mpfr_swap(x_, o.x_); return *this; }
    ~Real() { mpfr_clear(x_); }

    mpfr_prec_t prec() const { return mpfr_get_prec(x_); }
    mpfr_ptr raw() { return x_; }
    mpfr_srcptr raw() const { return x_; }

    static Real from_string(const std::string& s, mpfr_prec_t prec) {
        Real r(prec);
        mpfr_set_str(r.x_, s.c_str(), 10, MPFR_RNDN);
        return r;
    }
    static Real pi(mpfr_prec_t prec) { Real r(prec); mpfr_const_pi(r.x_, MPFR_RNDN); return r; }
    static Real sqrt_ui(unsigned long d, mpfr_prec_t prec) { Real r(prec); mpfr_sqrt_ui(r.x_, d, MPFR_RNDN); return r; }

    double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }
    bool is_zero() const { return mpfr_zero_p(x_) != 0; }
    int sign() const { return mpfr_sgn(x_); }

    friend Real operator+(const Real& a, const Real& b) { Real r(pmax(a, b)); mpfr_add(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    friend Real operator-(const Real& a, const Real& b) { Real r(pmax(a, b)); mpfr_sub(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    friend Real operator*(const Real& a, const Real& b) { Real r(pmax(a, b)); mpfr_mul(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    friend Real operator/(const Real& a, const Real& b) { Real r(pmax(a, b)); mpfr_div(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    Real operator-() const { Real r(prec()); mpfr_neg(r.x_, x_, MPFR_RNDN); return r; }

    friend Real abs(const Real& a) { Real r(a.prec()); mpfr_abs(r.x_, a.x_, MPFR_RNDN); return r; }
    friend Real sqrt(const Real& a) { Real r(a.prec()); mpfr_sqrt(r.x_, a.x_, MPFR_RNDN); return r; }
    // Distance from a to the nearest integer.
    friend Real dist_to_int(const Real& a) {
        Real fr(a.prec()), rn(a.prec());
        mpfr_round(rn.x_, a.x_);
        mpfr_sub(fr.x_, a.x_, rn.x_, MPFR_RNDN);
        mpfr_abs(fr.x_, fr.x_, MPFR_RNDN);
        return fr;
    }
    friend Real mul_si(const Real& a, long n) { Real r(a.prec()); mpfr_mul_si(r.x_, a.x_, n, MPFR_RNDN); return r; }

    friend bool operator<(const Real& a, const Real& b) { return mpfr_cmp(a.x_, b.x_) < 0; }
    friend bool operator>(const Real& a, const Real& b) { return mpfr_cmp(a.x_, b.x_) > 0; }
    friend bool operator<=(const Real& a, const Real& b) { return mpfr_cmp(a.x_, b.x_) <= 0; }
    friend bool operator>=(const Real& a, const Real& b) { return mpfr_cmp(a.x_, b.x_) >= 0; }

    std::string str(int sig_digits = 20) const {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%%.%dRg", sig_digits);
        char out[256];
        mpfr_snprintf(out, sizeof(out), buf, x_);
        return std::string(out);
    }

  private:
    static mpfr_prec_t pmax(const Real& a, const Real& b) { return a.prec() > b.prec() ? a.prec() : b.prec(); }
    mpfr_t x_;
};

}  // namespace tcohom
