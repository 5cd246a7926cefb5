#pragma once

#include "tcohom/lattice.hpp"

#include <cmath>
#include <map>

namespace tcohom {

// Finite sum of terms c * t4^k * exp(2*pi*m*t4), the coefficient class closed
// under every mode-wise operator in scope (d/dt4 keeps m and never raises k).
class CoeffFunction {
  public:
    using Key = std::pair<int, int>;  // (k, m)

    CoeffFunction() = default;
    static CoeffFunction constant(Complex c) {
        CoeffFunction f;
        f.add_term(0, 0, c);
        return f;
    }
    static CoeffFunction monomial(int k, int m, Complex c = 1.0) {
        CoeffFunction f;
        f.add_term(k, m, c);
        return f;
    }

    void add_term(int k, int m, Complex c) {
        if (k < 0) throw TcohomError("negative t4 power");
        auto it = terms_.find({k, m});
        if (it == terms_.end()) {
            if (c != Complex(0)) terms_.emplace(Key{k, m}, c);
        } else {
            it->second += c;
            if (it->second == Complex(0)) terms_.erase(it);
        }
    }

    const std::map<Key, Complex>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int max_k() const {
        int k = 0;
        for (auto& [km, c] : terms_) k = std::max(k, km.first);
        return k;
    }
    int max_abs_m() const {
        int m = 0;
        for (auto& [km, c] : terms_) m = std::max(m, std::abs(km.second));
        return m;
    }
    double sup_abs() const {  // l1 norm of coefficients (majorizes nothing fancy; a size gauge)
        double s = 0;
        for (auto& [km, c] : terms_) s += std::abs(c);
        return s;
    }

    CoeffFunction operator+(const CoeffFunction& o) const {
        CoeffFunction r = *this;
        for (auto& [km, c] : o.terms_) r.add_term(km.first, km.second, c);
        return r;
    }
    CoeffFunction operator*(Complex s) const {
        CoeffFunction r;
        if (s == Complex(0)) return r;
        for (auto& [km, c] : terms_) r.add_term(km.first, km.second, c * s);
        return r;
    }
    CoeffFunction operator*(const CoeffFunction& o) const {
        CoeffFunction r;
        for (auto& [a, ca] : terms_)
            for (auto& [b, cb] : o.terms_) r.add_term(a.first + b.first, a.second + b.second, ca * cb);
        return r;
    }

    CoeffFunction ddt() const {
        CoeffFunction r;
        constexpr double two_pi = 2.0 * 3.14159265358979323846264338327950288;
        for (auto& [km, c] : terms_) {
            auto [k, m] = km;
            if (m != 0) r.add_term(k, m, c * (two_pi * m));
            if (k > 0) r.add_term(k - 1, m, c * static_cast<double>(k));
        }
        return r;
    }

    CoeffFunction conj() const {
        CoeffFunction r;
        for (auto& [km, c] : terms_) r.add_term(km.first, km.second, std::conj(c));
        return r;
    }

    Complex eval(double t4) const {
        constexpr double two_pi = 2.0 * 3.14159265358979323846264338327950288;
        Complex s = 0;
        for (auto& [km, c] : terms_) s += c * std::pow(t4, km.first) * std::exp(two_pi * km.second * t4);
        return s;
    }

    // drop terms below rel_tol relative to the largest magnitude
    void prune(double rel_tol) {
        double mx = 0;
        for (auto& [km, c] : terms_) mx = std::max(mx, std::abs(c));
        if (mx == 0) return;
        for (auto it = terms_.begin(); it != terms_.end();)
            it = (std::abs(it->second) <= rel_tol * mx) ? terms_.erase(it) : std::next(it);
    }

    bool operator==(const CoeffFunction& o) const { return terms_ == o.terms_; }

  private:
    std::map<Key, Complex> terms_;
};

// z2-direction coefficient actions at mode sigma: del_z2 and delbar_z2 act on
// a(t4) by (1/(2i)) a' + B a and -(1/(2i)) a' + B a respectively, B = i*pi*s2.
inline CoeffFunction coeff_del_z2(const CoeffFunction& a, const ModeIndex& s) {
    const Complex half_over_i(0.0, -0.5);  // 1/(2i)
    return a.ddt() * half_over_i + a * Lattice::mode_multiplier_B(s);
}
inline CoeffFunction coeff_delbar_z2(const CoeffFunction& a, const ModeIndex& s) {
    const Complex minus_half_over_i(0.0, 0.5);
    return a.ddt() * minus_half_over_i + a * Lattice::mode_multiplier_B(s);
}
// del_z2 delbar_z2 composite on coefficients: (1/4) a'' + B^2 a
inline CoeffFunction coeff_del_delbar_z2(const CoeffFunction& a, const ModeIndex& s) {
    Complex B = Lattice::mode_multiplier_B(s);
    return a.ddt().ddt() * Complex(0.25) + a * (B * B);
}

}  // namespace tcohom
