#include "tcohom/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace tcohom {

namespace {

long long floor_div(long long a, long long b) {
    long long q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

long long isqrt_ll(long long n) {
    long long r = static_cast<long long>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// floor((P + sqrt(D))/Q) for non-square D > 0, Q != 0.
long long surd_floor(long long P, long long D, long long Q) {
    long long s = isqrt_ll(D);
    if (Q > 0) return floor_div(P + s, Q);
    // (P + sqrt(D))/Q = -((P + sqrt(D))/|Q|); the inner value is irrational
    long long f = floor_div(P + s, -Q);
    return -(f + 1);
}

std::optional<ContinuedFraction> cf_rational(long long num, long long den) {
    ContinuedFraction cf;
    cf.periodic = false;
    long long a = num, b = den;
    bool first = true;
    while (b != 0) {
        long long q = floor_div(a, b);
        cf.quotients.push_back(q);
        if (!first) cf.max_partial = std::max(cf.max_partial, q);
        first = false;
        long long r = a - q * b;
        a = b;
        b = r;
    }
    return cf;
}

// PQa expansion of (P0 + sqrt(D))/Q0 until the (P,Q) state repeats.
std::optional<ContinuedFraction> cf_quadratic(long long P0, long long D, long long Q0) {
    if (Q0 == 0 || D <= 0 || is_perfect_square(D)) return std::nullopt;
    // enforce Q | D - P^2
    if ((D - P0 * P0) % Q0 != 0) {
        long long s = std::llabs(Q0);
        P0 *= s;
        D *= s * s;
        Q0 *= s;
    }
    ContinuedFraction cf;
    cf.periodic = true;
    long long P = P0, Q = Q0;
    std::set<std::pair<long long, long long>> seen;
    for (int k = 0; k < 100000; ++k) {
        long long a = surd_floor(P, D, Q);
        cf.quotients.push_back(a);
        if (k >= 1) cf.max_partial = std::max(cf.max_partial, a);
        long long Pn = a * Q - P;
        long long Qn = (D - Pn * Pn) / Q;
        if (Qn == 0) return std::nullopt;  // would mean D square
        P = Pn;
        Q = Qn;
        if (k >= 1) {
            if (seen.count({P, Q})) return cf;
            seen.insert({P, Q});
        }
    }
    return std::nullopt;  // no cycle in bound: give up (should not happen)
}

}  // namespace

std::optional<ContinuedFraction> continued_fraction(const RealExpr& x) {
    if (auto* r = x.as_rational()) return cf_rational(r->num, r->den);
    if (auto* q = x.as_quadratic()) {
        // a_num/a_den + b_num/b_den sqrt(d) = (a_num*b_den + b_num*a_den*sqrt(d)) / (a_den*b_den)
        long long P = q->a_num * q->b_den;
        long long co = q->b_num * q->a_den;  // coefficient of sqrt(d)
        long long Q = q->a_den * q->b_den;
        long long D = co * co * q->d;
        if (co < 0) {  // (P - sqrt(D))/Q -> (-P + sqrt(D))/(-Q)
            P = -P;
            Q = -Q;
        }
        return cf_quadratic(P, D, Q);
    }
    return std::nullopt;
}

namespace {

struct ScanResult {
    double min_dist = std::numeric_limits<double>::infinity();
    double min_n_dist = std::numeric_limits<double>::infinity();
    long argmin_n_dist = 0;
    std::vector<std::pair<long, double>> samples;
    std::vector<std::pair<double, double>> envelopes;  // (delta, fitted C)
};

ScanResult scan_distances(const Lattice& lat, long max_n, double floor_delta, mpfr_prec_t prec) {
    ScanResult out;
    Real pv = lat.p_expr().evaluate(prec);
    Real qv = lat.q_expr().evaluate(prec);
    Real np(prec), nq(prec);
    std::vector<double> deltas;
    for (double d : {floor_delta, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99})
        if (d >= floor_delta && d < 1.0) deltas.push_back(d);
    std::sort(deltas.begin(), deltas.end());
    deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
    std::vector<double> log_c(deltas.size(), std::numeric_limits<double>::infinity());

    for (long n = 1; n <= max_n; ++n) {
        np = np + pv;
        nq = nq + qv;
        double d1 = dist_to_int(np).to_double();
        double d2 = dist_to_int(nq).to_double();
        double dist = std::hypot(d1, d2);
        out.min_dist = std::min(out.min_dist, dist);
        double nd = dist * static_cast<double>(n);
        if (nd < out.min_n_dist) {
            out.min_n_dist = nd;
            out.argmin_n_dist = n;
            if (out.samples.empty() || out.samples.back().first < n) out.samples.emplace_back(n, dist);
        }
        if (n <= 32 || n == max_n) {
            if (out.samples.empty() || out.samples.back().first < n) out.samples.emplace_back(n, dist);
        }
        double ld = dist > 0 ? std::log(dist) : -745.0;  // log of double-underflow floor
        for (size_t i = 0; i < deltas.size(); ++i)
            log_c[i] = std::min(log_c[i], ld - n * std::log(deltas[i]));
    }
    std::sort(out.samples.begin(), out.samples.end());
    out.samples.erase(std::unique(out.samples.begin(), out.samples.end(),
                                  [](auto& a, auto& b) { return a.first == b.first; }),
                      out.samples.end());
    for (size_t i = 0; i < deltas.size(); ++i) out.envelopes.emplace_back(deltas[i], std::exp(log_c[i]));
    return out;
}

// Theta certificate from a continued-fraction bound on one coordinate:
// bounded partial quotients M give ||n*alpha|| >= 1/((M+2) n), and
// c/n >= C delta^n for all n >= 1 with delta = 1/2, C = 2c.
DiophantineCertificate certify_from_cf(const Lattice& lat, const ContinuedFraction& cf,
                                       const char* coord, const ClassifyOptions& opts) {
    DiophantineCertificate cert;
    cert.classification = ThetaClass::Theta;
    cert.method = DiophantineCertificate::Method::ContinuedFraction;
    double c = 1.0 / (static_cast<double>(cf.max_partial) + 2.0);
    cert.delta_est = 0.5;
    cert.C_est = 2.0 * c;
    cert.precision_used = opts.prec;
    std::ostringstream os;
    os << "periodic continued fraction on " << coord << ": max partial quotient "
       << cf.max_partial << " gives dist >= " << c << "/n >= C*delta^n";
    cert.diagnostic = os.str();
    long sample_n = std::min<long>(opts.max_n, 4096);
    auto scan = scan_distances(lat, sample_n, opts.geometric_floor, opts.prec);
    cert.samples = scan.samples;
    cert.envelope_fits = scan.envelopes;
    return cert;
}

}  // namespace

DiophantineCertificate classify_theta(const Lattice& lat, const ClassifyOptions& opts) {
    DiophantineCertificate cert;
    cert.precision_used = opts.prec;

    if (lat.p_expr().is_rational() && lat.q_expr().is_rational()) {
        cert.classification = ThetaClass::NotToroidal;
        cert.method = DiophantineCertificate::Method::ContinuedFraction;
        cert.delta_est = 0.5;
        cert.diagnostic = "both p and q are exactly rational: dist(Z^2,(np,nq)) vanishes along multiples of the common denominator";
        long long dp = lat.p_expr().as_rational()->den;
        long long dq = lat.q_expr().as_rational()->den;
        long long l = dp / std::gcd(dp, dq) * dq;
        cert.samples = {{l, 0.0}};
        return cert;
    }

    // exact irrational coordinate: coordinate-wise continued-fraction certificate
    if (lat.p_expr().as_quadratic()) {
        if (auto cf = continued_fraction(lat.p_expr())) return certify_from_cf(lat, *cf, "p", opts);
    }
    if (lat.q_expr().as_quadratic()) {
        if (auto cf = continued_fraction(lat.q_expr())) return certify_from_cf(lat, *cf, "q", opts);
    }

    // inexact input: brute-force scan, evidence only
    cert.method = DiophantineCertificate::Method::BruteForceScan;
    for (const RealExpr* e : {&lat.p_expr(), &lat.q_expr()}) {
        if (auto* d = e->as_decimal()) {
            double available = d->precision * std::log2(10.0);
            if (available < std::log2(static_cast<double>(opts.max_n)) + 32) {
                cert.classification = ThetaClass::Inconclusive;
                cert.diagnostic = "precision exhaustion: decimal input carries too few digits for the requested scan range";
                return cert;
            }
        }
    }
    auto scan = scan_distances(lat, opts.max_n, opts.geometric_floor, opts.prec);
    cert.samples = scan.samples;
    cert.envelope_fits = scan.envelopes;
    double resolvable = std::ldexp(static_cast<double>(opts.max_n), 10 - static_cast<int>(opts.prec));
    if (scan.min_dist > 0 && scan.min_dist < resolvable) {
        cert.classification = ThetaClass::Inconclusive;
        cert.diagnostic = "precision exhaustion: observed distances at the working precision floor";
        return cert;
    }
    std::ostringstream os;
    if (scan.min_n_dist < opts.collapse_threshold) {
        cert.classification = ThetaClass::WildEvidence;
        cert.delta_est = opts.geometric_floor;
        cert.C_est = scan.min_n_dist;
        os << "approximation collapse: min n*dist = " << scan.min_n_dist << " at n = " << scan.argmin_n_dist
           << " (threshold " << opts.collapse_threshold << "); decay undercuts every fitted geometric envelope "
           << "at the collapse points. Evidence only, not a proof of wildness.";
    } else {
        cert.classification = ThetaClass::Inconclusive;
        os << "no continued-fraction certificate available for inexact input and no collapse observed "
           << "(min n*dist = " << scan.min_n_dist << " over n <= " << opts.max_n << ")";
    }
    cert.diagnostic = os.str();
    return cert;
}

}  // namespace tcohom
