#pragma once

#include "tcohom/modebasis.hpp"

#include <gmpxx.h>

#include <optional>

namespace tcohom {

// Element of Q(i): re + i*im with exact rationals.
struct QRatC {
    mpq_class re, im;
    QRatC() : re(0), im(0) {}
    QRatC(long r, long i = 0) : re(r), im(i) {}
    QRatC(mpq_class r, mpq_class i) : re(std::move(r)), im(std::move(i)) {}
    bool is_zero() const { return re == 0 && im == 0; }
    QRatC operator+(const QRatC& o) const { return {re + o.re, im + o.im}; }
    QRatC operator-(const QRatC& o) const { return {re - o.re, im - o.im}; }
    QRatC operator*(const QRatC& o) const { return {re * o.re - im * o.im, re * o.im + im * o.re}; }
    QRatC operator-() const { return {-re, -im}; }
    QRatC conj() const { return {re, -im}; }
    QRatC inv() const {
        mpq_class n = re * re + im * im;
        return {re / n, -im / n};
    }
};

// Element of K = Q(i)(sqrt(d)): u + v*sqrt(d), d square-free and shared per matrix.
struct KElem {
    QRatC u, v;
    bool is_zero() const { return u.is_zero() && v.is_zero(); }
    KElem conj() const { return {u.conj(), v.conj()}; }  // complex conjugation; sqrt(d) real
};
KElem k_add(const KElem& a, const KElem& b);
KElem k_sub(const KElem& a, const KElem& b);
KElem k_mul(const KElem& a, const KElem& b, long d);
KElem k_neg(const KElem& a);
KElem k_inv(const KElem& a, long d);

using KMat = std::vector<std::vector<KElem>>;  // row-major

int k_rank(KMat m, long d);
std::vector<std::vector<KElem>> k_kernel(KMat m, long d, int ncols);  // kernel vectors (each length ncols)

// Exact lattice data: tau_re, tau_im, p, q as elements a + b*sqrt(d) of Q(sqrt(d)),
// available when all four parameters are Rational/QuadraticIrrational over one d.
struct ExactLatticeData {
    long d = 2;
    KElem tau_re, tau_im, p, q;  // imaginary parts zero
};
std::optional<ExactLatticeData> exact_lattice_data(const Lattice& lat);

// Exact mode-operator matrix in the rescaled basis (pi*t4)^k e^{2 pi m t4}:
// every basic operator is pi times a K-matrix, and pi powers are uniform per
// operator, so ranks and kernels over K equal those of the true matrices.
KMat exact_op_matrix(const ExactLatticeData& ex, const ModeIndex& s, OperatorKind op,
                     const BlockBasis& dom, const BlockBasis& tgt);
KMat exact_membership_rows(const ExactLatticeData& ex, const ModeIndex& s, const BlockBasis& b,
                           const std::vector<SlotCond>& per_frame);

}  // namespace tcohom
