#include "tcohom/lattice.hpp"

#include <cmath>

namespace tcohom {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

Lattice::Lattice(RealExpr tau_re, RealExpr tau_im, RealExpr p, RealExpr q, mpfr_prec_t prec)
    : tau_re_(std::move(tau_re)), tau_im_(std::move(tau_im)), p_(std::move(p)), q_(std::move(q)), prec_(prec) {
    tau_re_d_ = tau_re_.evaluate(prec_).to_double();
    tau_im_d_ = tau_im_.evaluate(prec_).to_double();
    p_d_ = p_.evaluate(prec_).to_double();
    q_d_ = q_.evaluate(prec_).to_double();
    if (!(tau_im_d_ > 0.0)) throw InvalidLatticeError("Im(tau) must be positive");
}

bool Lattice::is_toroidal() const {
    // Rational means exactly rational as given; Decimal/Liouville inputs stand in
    // for irrational targets and do not defeat toroidality.
    return !(p_.is_rational() && q_.is_rational());
}

RealCoords Lattice::to_real_coords(Complex z1, Complex z2) const {
    if (!(tau_im_d_ > 0.0)) throw InvalidLatticeError("degenerate lattice: Im(tau) <= 0");
    RealCoords t;
    t.t3 = z1.imag() / tau_im_d_;
    t.t1 = z1.real() - (tau_re_d_ / tau_im_d_) * z1.imag();
    t.t4 = z2.imag();
    t.t2 = z2.real() - p_d_ * t.t1 - q_d_ * t.t3;
    return t;
}

std::pair<Complex, Complex> Lattice::from_real_coords(const RealCoords& t) const {
    Complex z1 = Complex(t.t1, 0) + tau() * t.t3;
    Complex z2 = Complex(p_d_ * t.t1 + t.t2 + q_d_ * t.t3, t.t4);
    return {z1, z2};
}

Complex Lattice::mode_multiplier_A(const ModeIndex& s) const {
    // (pi*i/Im tau) * ( s1*(Im tau - i Re tau) + s2*(-p*(Im tau - i Re tau) - i q) + i s3 )
    const Complex i(0.0, 1.0);
    Complex w(tau_im_d_, -tau_re_d_);  // Im tau - i Re tau
    Complex inner = Complex(s.s1) * w + Complex(s.s2) * (-p_d_ * w - i * q_d_) + i * Complex(s.s3);
    return (kPi * i / tau_im_d_) * inner;
}

Complex Lattice::mode_multiplier_B(const ModeIndex& s) {
    return Complex(0.0, kPi * s.s2);
}

std::array<std::pair<Complex, Complex>, 3> Lattice::generators() const {
    return {{{Complex(0, 0), Complex(1, 0)},
             {Complex(1, 0), Complex(p_d_, 0)},
             {tau(), Complex(q_d_, 0)}}};
}

std::vector<std::pair<int, double>> Lattice::divisor_decay_profile(int N) const {
    std::vector<std::pair<int, double>> out;
    double running = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= N; ++n) {
        // new modes on the boundary of the shell |sigma_i| <= n
        for (int a = -n; a <= n; ++a)
            for (int b = -n; b <= n; ++b)
                for (int c = -n; c <= n; ++c) {
                    if (std::max({std::abs(a), std::abs(b), std::abs(c)}) != n) continue;
                    double v = std::abs(mode_multiplier_A({a, b, c}));
                    if (v < running) running = v;
                }
        out.emplace_back(n, running);
    }
    return out;
}

const char* to_string(ThetaClass c) {
    switch (c) {
        case ThetaClass::Theta: return "Theta";
        case ThetaClass::WildEvidence: return "WildEvidence";
        case ThetaClass::NotToroidal: return "NotToroidal";
        case ThetaClass::Inconclusive: return "Inconclusive";
    }
    return "?";
}

}  // namespace tcohom
