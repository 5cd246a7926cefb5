#include "tcohom/form.hpp"

#include <sstream>

namespace tcohom {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846264338327950288;
}

SpectralForm::SpectralForm(int p, int q, LatticePtr lattice, FormLimits limits)
    : p_(p), q_(q), lattice_(std::move(lattice)), limits_(limits) {
    if (p < 0 || p > 2 || q < 0 || q > 2) throw TcohomError("bidegree out of range [0,2]x[0,2]");
    if (!lattice_) throw TcohomError("form requires an owning lattice");
}

void SpectralForm::add_entry(const ModeIndex& s, const Frame& f, const CoeffFunction& c) {
    if (f.p() != p_ || f.q() != q_) {
        std::ostringstream os;
        os << "frame " << f.str() << " does not match bidegree (" << p_ << "," << q_ << ")";
        throw TcohomError(os.str());
    }
    if (c.is_zero()) return;
    if (c.max_k() > limits_.K_max || c.max_abs_m() > limits_.M_max) {
        std::ostringstream os;
        os << "coefficient exceeds caps K_max=" << limits_.K_max << " M_max=" << limits_.M_max
           << " (got k=" << c.max_k() << " |m|=" << c.max_abs_m() << ")";
        throw TruncationOverflowError(os.str());
    }
    auto it = entries_.find({s, f});
    if (it == entries_.end()) {
        entries_.emplace(Key{s, f}, c);
    } else {
        it->second = it->second + c;
        if (it->second.is_zero()) entries_.erase(it);
    }
}

const CoeffFunction* SpectralForm::coeff(const ModeIndex& s, const Frame& f) const {
    auto it = entries_.find({s, f});
    return it == entries_.end() ? nullptr : &it->second;
}

void SpectralForm::check_compatible(const SpectralForm& o, const char* what) const {
    if (!(*lattice_ == *o.lattice_)) {
        throw TcohomError(std::string(what) + ": lattice mismatch");
    }
}

SpectralForm SpectralForm::operator+(const SpectralForm& o) const {
    check_compatible(o, "add");
    if (p_ != o.p_ || q_ != o.q_) throw TcohomError("add: bidegree mismatch");
    FormLimits lim{std::max(limits_.K_max, o.limits_.K_max), std::max(limits_.M_max, o.limits_.M_max)};
    SpectralForm r(p_, q_, lattice_, lim);
    for (auto& [k, c] : entries_) r.add_entry(k.first, k.second, c);
    for (auto& [k, c] : o.entries_) r.add_entry(k.first, k.second, c);
    return r;
}

SpectralForm SpectralForm::operator*(Complex s) const {
    SpectralForm r(p_, q_, lattice_, limits_);
    if (s == Complex(0)) return r;
    for (auto& [k, c] : entries_) r.add_entry(k.first, k.second, c * s);
    return r;
}

SpectralForm SpectralForm::wedge(const SpectralForm& o) const {
    check_compatible(o, "wedge");
    int np = p_ + o.p_, nq = q_ + o.q_;
    FormLimits lim{std::max(limits_.K_max, o.limits_.K_max), std::max(limits_.M_max, o.limits_.M_max)};
    if (np > 2 || nq > 2) return SpectralForm(std::min(np, 2), std::min(nq, 2), lattice_, lim);
    SpectralForm r(np, nq, lattice_, lim);
    for (auto& [ka, ca] : entries_)
        for (auto& [kb, cb] : o.entries_) {
            Frame f;
            int sign = frame_wedge(ka.second, kb.second, f);
            if (sign == 0) continue;
            r.add_entry(ka.first + kb.first, f, (ca * cb) * Complex(sign));
        }
    return r;
}

SpectralForm SpectralForm::conjugate() const {
    SpectralForm r(q_, p_, lattice_, limits_);
    for (auto& [k, c] : entries_) {
        Frame f{k.second.J, k.second.I};
        r.add_entry(-k.first, f, c.conj() * Complex(conj_sign(k.second)));
    }
    return r;
}

std::map<Frame, Complex> SpectralForm::evaluate(Complex z1, Complex z2) const {
    RealCoords t = lattice_->to_real_coords(z1, z2);
    std::map<Frame, Complex> out;
    for (auto f : frames_of_bidegree(p_, q_)) out[f] = 0;
    for (auto& [k, c] : entries_) {
        const ModeIndex& s = k.first;
        double phase = kTwoPi * (s.s1 * t.t1 + s.s2 * t.t2 + s.s3 * t.t3);
        Complex character = std::polar(1.0, phase);
        out[k.second] += c.eval(t.t4) * character;
    }
    return out;
}

double SpectralForm::max_abs_coeff() const {
    double mx = 0;
    for (auto& [k, c] : entries_)
        for (auto& [km, v] : c.terms()) mx = std::max(mx, std::abs(v));
    return mx;
}

void SpectralForm::prune(double rel_tol) {
    double mx = max_abs_coeff();
    if (mx == 0) return;
    for (auto it = entries_.begin(); it != entries_.end();) {
        CoeffFunction cleaned;
        for (auto& [km, v] : it->second.terms())
            if (std::abs(v) > rel_tol * mx) cleaned.add_term(km.first, km.second, v);
        if (cleaned.is_zero()) {
            it = entries_.erase(it);
        } else {
            it->second = cleaned;
            ++it;
        }
    }
}

SheafFlags SpectralForm::sheaf_membership(double rel_tol) const {
    SheafFlags flags;
    double scale = std::max(1.0, max_abs_coeff());
    auto vanishes = [&](const CoeffFunction& c) { return c.sup_abs() <= rel_tol * scale; };

    // F^{p,q}: J subset {1}, every coefficient delbar_{z2}-closed
    flags.in_F = true;
    for (auto& [k, c] : entries_) {
        if (k.second.J & 0b10) { flags.in_F = false; break; }
        if (!vanishes(coeff_delbar_z2(c, k.first))) { flags.in_F = false; break; }
    }
    // Fbar^{p,q}: I subset {1}, del_{z2}-closed
    flags.in_Fbar = true;
    for (auto& [k, c] : entries_) {
        if (k.second.I & 0b10) { flags.in_Fbar = false; break; }
        if (!vanishes(coeff_del_z2(c, k.first))) { flags.in_Fbar = false; break; }
    }
    // G classes exist for (0,0), (1,0), (0,1), (1,1) with designated frames:
    //   function: coefficient del_z2 delbar_z2-closed
    //   (1,0): f1 dz1 (G) + f2 dz2 (F);   (0,1): f1 dzb1 (G) + f2 dzb2 (Fbar)
    //   (1,1): dz1^dzb1 (G), dz2^dzb1 (F), dz1^dzb2 (Fbar); no dz2^dzb2
    flags.in_G = true;
    if ((p_ > 1 || q_ > 1)) flags.in_G = false;
    for (auto& [k, c] : entries_) {
        if (!flags.in_G) break;
        const Frame& f = k.second;
        bool holo2 = (f.I & 0b10) != 0, anti2 = (f.J & 0b10) != 0;
        if (holo2 && anti2) { flags.in_G = false; break; }
        if (holo2) {  // dz2 leg: F condition
            if (!vanishes(coeff_delbar_z2(c, k.first))) { flags.in_G = false; break; }
        } else if (anti2) {  // dzbar2 leg: Fbar condition
            if (!vanishes(coeff_del_z2(c, k.first))) { flags.in_G = false; break; }
        } else {  // only z1-type legs: G condition
            if (!vanishes(coeff_del_delbar_z2(c, k.first))) { flags.in_G = false; break; }
        }
    }
    return flags;
}

bool SpectralForm::same_shape(const SpectralForm& o, double rel_tol) const {
    if (p_ != o.p_ || q_ != o.q_) return false;
    double scale = std::max({1.0, max_abs_coeff(), o.max_abs_coeff()});
    SpectralForm diff = *this + o * Complex(-1.0);
    for (auto& [k, c] : diff.entries())
        if (c.sup_abs() > rel_tol * scale) return false;
    return true;
}

SpectralForm make_form(const SpectralForm::LatticePtr& lat, int p, int q, const ModeIndex& s,
                       const Frame& f, const CoeffFunction& c, FormLimits limits) {
    SpectralForm r(p, q, lat, limits);
    r.add_entry(s, f, c);
    return r;
}

SpectralForm zero_form(const SpectralForm::LatticePtr& lat, int p, int q, FormLimits limits) {
    return SpectralForm(p, q, lat, limits);
}

}  // namespace tcohom
