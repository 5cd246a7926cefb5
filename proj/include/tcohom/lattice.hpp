#pragma once

#include "tcohom/realexpr.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tcohom {

using Complex = std::complex<double>;

// Fourier mode sigma = (s1, s2, s3) indexing exp(2*pi*i*(s1*t1 + s2*t2 + s3*t3)).
struct ModeIndex {
    int s1 = 0, s2 = 0, s3 = 0;

    bool is_zero() const { return s1 == 0 && s2 == 0 && s3 == 0; }
    ModeIndex operator+(const ModeIndex& o) const { return {s1 + o.s1, s2 + o.s2, s3 + o.s3}; }
    ModeIndex operator-() const { return {-s1, -s2, -s3}; }
    bool operator==(const ModeIndex& o) const = default;
    auto operator<=>(const ModeIndex& o) const = default;
};

struct RealCoords {
    double t1 = 0, t2 = 0, t3 = 0, t4 = 0;
};

// The discrete subgroup generated by (0,1), (1,p), (tau,q) in C^2, together
// with the real coordinate system it induces and the per-mode multipliers.
class Lattice {
  public:
    Lattice(RealExpr tau_re, RealExpr tau_im, RealExpr p, RealExpr q, mpfr_prec_t prec = 128);

    const RealExpr& tau_re_expr() const { return tau_re_; }
    const RealExpr& tau_im_expr() const { return tau_im_; }
    const RealExpr& p_expr() const { return p_; }
    const RealExpr& q_expr() const { return q_; }
    mpfr_prec_t precision() const { return prec_; }

    double tau_re() const { return tau_re_d_; }
    double tau_im() const { return tau_im_d_; }
    double p() const { return p_d_; }
    double q() const { return q_d_; }
    Complex tau() const { return {tau_re_d_, tau_im_d_}; }

    bool is_toroidal() const;  // p or q irrational (as given)

    RealCoords to_real_coords(Complex z1, Complex z2) const;
    std::pair<Complex, Complex> from_real_coords(const RealCoords& t) const;

    // A^sigma: the multiplier through which dbar_{z1} acts on mode sigma; the
    // small divisor whose decay separates theta from wild lattices.
    Complex mode_multiplier_A(const ModeIndex& s) const;
    // B^sigma = i*pi*s2, through which the z2-derivatives act.
    static Complex mode_multiplier_B(const ModeIndex& s);

    // The three generators of the lattice as points of C^2.
    std::array<std::pair<Complex, Complex>, 3> generators() const;

    // min |A^sigma| over 0 < max|sigma_i| <= n, cumulative over shells 1..N.
    std::vector<std::pair<int, double>> divisor_decay_profile(int N) const;

    bool operator==(const Lattice& o) const {
        return tau_re_ == o.tau_re_ && tau_im_ == o.tau_im_ && p_ == o.p_ && q_ == o.q_;
    }

  private:
    RealExpr tau_re_, tau_im_, p_, q_;
    mpfr_prec_t prec_;
    double tau_re_d_, tau_im_d_, p_d_, q_d_;
};

enum class ThetaClass { Theta, WildEvidence, NotToroidal, Inconclusive };

const char* to_string(ThetaClass c);

struct ClassifyOptions {
    long max_n = 100000;
    double geometric_floor = 0.01;
    double collapse_threshold = 0.05;  // inf n*dist below this => wild-like collapse
    mpfr_prec_t prec = 256;
};

struct DiophantineCertificate {
    ThetaClass classification = ThetaClass::Inconclusive;
    double C_est = 0.0;
    double delta_est = 0.0;
    std::vector<std::pair<long, double>> samples;  // (n, dist(Z^2,(np,nq))), n strictly increasing
    enum class Method { ContinuedFraction, BruteForceScan } method = Method::BruteForceScan;
    std::string diagnostic;
    // fitted geometric envelopes C(delta) = min_n dist/delta^n over the tested grid
    std::vector<std::pair<double, double>> envelope_fits;
    mpfr_prec_t precision_used = 0;
};

DiophantineCertificate classify_theta(const Lattice& lattice, const ClassifyOptions& opts = {});

// Continued fraction of an exact RealExpr (Rational terminates; QuadraticIrrational
// is computed until the (P,Q) state repeats). Returns partial quotients a_0..a_k and,
// for quadratic inputs, the max partial quotient over k >= 1 (preperiod+period).
struct ContinuedFraction {
    std::vector<long long> quotients;
    bool periodic = false;       // true for quadratic irrationals (cycle detected)
    long long max_partial = 0;   // max a_k for k >= 1
};
std::optional<ContinuedFraction> continued_fraction(const RealExpr& x);

}  // namespace tcohom
