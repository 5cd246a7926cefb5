#include "tcohom/calculus.hpp"

#include <functional>

namespace tcohom {

const char* to_string(OperatorKind op) {
    switch (op) {
        case OperatorKind::Del: return "del";
        case OperatorKind::Delbar: return "delbar";
        case OperatorKind::D: return "d";
        case OperatorKind::DelDelbar: return "deldelbar";
        case OperatorKind::Del_z1: return "del_z1";
        case OperatorKind::Delbar_z1: return "delbar_z1";
        case OperatorKind::Del_z2: return "del_z2";
        case OperatorKind::Delbar_z2: return "delbar_z2";
    }
    return "?";
}

namespace {

// legs: dz1=0, dz2=1, dzbar1=2, dzbar2=3
SpectralForm apply_leg(int leg, const SpectralForm& f,
                       const std::function<CoeffFunction(const CoeffFunction&, const ModeIndex&)>& act) {
    int np = f.p() + (leg < 2 ? 1 : 0);
    int nq = f.q() + (leg < 2 ? 0 : 1);
    if (np > 2 || nq > 2) return SpectralForm(std::min(np, 2), std::min(nq, 2), f.lattice(), f.limits());
    SpectralForm r(np, nq, f.lattice(), f.limits());
    for (auto& [key, a] : f.entries()) {
        Frame nf = key.second;
        int sign = wedge_leg_left(leg, nf);
        if (sign == 0) continue;
        CoeffFunction c = act(a, key.first);
        if (c.is_zero()) continue;
        r.add_entry(key.first, nf, c * Complex(sign));
    }
    return r;
}

}  // namespace

SpectralForm apply(OperatorKind op, const SpectralForm& f) {
    const auto& lat = *f.lattice();
    switch (op) {
        case OperatorKind::Delbar_z1:
            return apply_leg(2, f, [&](const CoeffFunction& a, const ModeIndex& s) {
                return a * lat.mode_multiplier_A(s);
            });
        case OperatorKind::Del_z1:
            return apply_leg(0, f, [&](const CoeffFunction& a, const ModeIndex& s) {
                return a * (-std::conj(lat.mode_multiplier_A(s)));
            });
        case OperatorKind::Del_z2:
            return apply_leg(1, f, [&](const CoeffFunction& a, const ModeIndex& s) {
                return coeff_del_z2(a, s);
            });
        case OperatorKind::Delbar_z2:
            return apply_leg(3, f, [&](const CoeffFunction& a, const ModeIndex& s) {
                return coeff_delbar_z2(a, s);
            });
        case OperatorKind::Del:
            return apply(OperatorKind::Del_z1, f) + apply(OperatorKind::Del_z2, f);
        case OperatorKind::Delbar:
            return apply(OperatorKind::Delbar_z1, f) + apply(OperatorKind::Delbar_z2, f);
        case OperatorKind::DelDelbar:
            return apply(OperatorKind::Del, apply(OperatorKind::Delbar, f));
        case OperatorKind::D: {
            // d = del + delbar is bidegree-inhomogeneous; only representable as a
            // single form when one component vanishes identically.
            auto a = apply(OperatorKind::Del, f);
            auto b = apply(OperatorKind::Delbar, f);
            if (b.is_zero()) return a;
            if (a.is_zero()) return b;
            throw TcohomError("apply(D, f): result is bidegree-inhomogeneous, use apply_d()");
        }
    }
    throw TcohomError("unknown operator");
}

FormSum apply_d(const SpectralForm& f) {
    FormSum s;
    s.add(apply(OperatorKind::Del, f));
    s.add(apply(OperatorKind::Delbar, f));
    return s;
}

void FormSum::add(SpectralForm part) {
    auto key = std::make_pair(part.p(), part.q());
    auto it = parts.find(key);
    if (it == parts.end()) {
        if (!part.is_zero()) parts.emplace(key, std::move(part));
    } else {
        it->second = it->second + part;
        if (it->second.is_zero()) parts.erase(it);
    }
}

bool FormSum::is_small(double tol, double scale) const {
    for (auto& [bd, g] : parts)
        for (auto& [k, c] : g.entries())
            for (auto& [km, v] : c.terms())
                if (std::abs(v) > tol * scale) return false;
    return true;
}

bool is_closed(OperatorKind op, const SpectralForm& f, double tol) {
    double scale = 1.0 + f.max_abs_coeff();
    if (op == OperatorKind::D) return apply_d(f).is_small(tol, scale);
    FormSum s;
    s.add(apply(op, f));
    return s.is_small(tol, scale);
}

}  // namespace tcohom
