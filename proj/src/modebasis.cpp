#include "tcohom/modebasis.hpp"

namespace tcohom {

Vec BlockBasis::to_vector(const SpectralForm& f, const ModeIndex& s) const {
    Vec v = Vec::Zero(dim());
    for (auto& [key, c] : f.entries()) {
        if (!(key.first == s)) continue;
        int fi = frame_index(key.second);
        if (fi < 0) throw TcohomError("frame not in block basis");
        accumulate(v, fi, c);
    }
    return v;
}

SpectralForm BlockBasis::to_form(const SpectralForm::LatticePtr& lat, const ModeIndex& s, const Vec& v,
                                 double drop_tol) const {
    FormLimits lim{std::max(K_, 4), std::max(M_, 4)};
    SpectralForm f(p_, q_, lat, lim);
    double scale = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    for (size_t fi = 0; fi < frames_.size(); ++fi) {
        CoeffFunction c;
        for (int k = 0; k <= K_; ++k)
            for (int m = -M_; m <= M_; ++m) {
                Complex val = v[index(static_cast<int>(fi), k, m)];
                if (std::abs(val) > drop_tol * scale) c.add_term(k, m, val);
            }
        if (!c.is_zero()) f.add_entry(s, frames_[fi], c);
    }
    return f;
}

std::vector<int> BlockBasis::embed_indices(const BlockBasis& big) const {
    if (big.p_ != p_ || big.q_ != q_ || big.K_ < K_ || big.M_ < M_)
        throw TcohomError("embed_indices: incompatible windows");
    std::vector<int> ix(dim());
    for (size_t fi = 0; fi < frames_.size(); ++fi)
        for (int k = 0; k <= K_; ++k)
            for (int m = -M_; m <= M_; ++m)
                ix[index(static_cast<int>(fi), k, m)] = big.index(static_cast<int>(fi), k, m);
    return ix;
}

Mat op_matrix(const SpectralForm::LatticePtr& lat, const ModeIndex& s, OperatorKind op,
              const BlockBasis& dom, const BlockBasis& tgt) {
    Mat M = Mat::Zero(tgt.dim(), dom.dim());
    if (tgt.dim() == 0 || dom.dim() == 0) return M;
    FormLimits lim{std::max(dom.K(), tgt.K()), std::max(dom.M(), tgt.M())};
    for (int fi = 0; fi < static_cast<int>(dom.frames().size()); ++fi)
        for (int k = 0; k <= dom.K(); ++k)
            for (int m = -dom.M(); m <= dom.M(); ++m) {
                SpectralForm e = make_form(lat, dom.p(), dom.q(), s, dom.frames()[fi],
                                           CoeffFunction::monomial(k, m), lim);
                SpectralForm img = apply(op, e);
                if (img.p() != tgt.p() || img.q() != tgt.q()) {
                    if (img.is_zero()) continue;
                    throw TcohomError("op_matrix: image bidegree mismatch");
                }
                int col = dom.index(fi, k, m);
                for (auto& [key, c] : img.entries()) {
                    int tfi = tgt.frame_index(key.second);
                    if (tfi < 0) throw TcohomError("op_matrix: image frame outside target");
                    for (auto& [km, val] : c.terms()) {
                        if (km.first > tgt.K() || std::abs(km.second) > tgt.M())
                            throw TruncationOverflowError("op_matrix: image outside target window");
                        M(tgt.index(tfi, km.first, km.second), col) += val;
                    }
                }
            }
    return M;
}

namespace {

// rows of the coefficient-ODE operator acting within one frame slot
void add_ode_rows(Mat& R, int& row, const ModeIndex& s, const BlockBasis& b, int fi, SlotCond cond) {
    int cd = b.coeff_dim();
    for (int k = 0; k <= b.K(); ++k)
        for (int m = -b.M(); m <= b.M(); ++m) {
            CoeffFunction e = CoeffFunction::monomial(k, m);
            CoeffFunction img;
            switch (cond) {
                case SlotCond::F: img = coeff_delbar_z2(e, s); break;
                case SlotCond::Fbar: img = coeff_del_z2(e, s); break;
                case SlotCond::G: img = coeff_del_delbar_z2(e, s); break;
                case SlotCond::Zero: img = e; break;
                case SlotCond::None: continue;
            }
            for (auto& [km, val] : img.terms())
                R(row + km.first * (2 * b.M() + 1) + (km.second + b.M()), b.index(fi, k, m)) += val;
        }
    row += cd;
}

}  // namespace

Mat membership_rows(const ModeIndex& s, const BlockBasis& b, const std::vector<SlotCond>& per_frame) {
    if (per_frame.size() != b.frames().size()) throw TcohomError("membership_rows: slot count mismatch");
    int nrows = 0;
    for (auto c : per_frame)
        if (c != SlotCond::None) nrows += b.coeff_dim();
    Mat R = Mat::Zero(nrows, b.dim());
    int row = 0;
    for (size_t fi = 0; fi < per_frame.size(); ++fi)
        if (per_frame[fi] != SlotCond::None) add_ode_rows(R, row, s, b, static_cast<int>(fi), per_frame[fi]);
    return R;
}

std::vector<SlotCond> g_slot_conditions(const BlockBasis& b) {
    std::vector<SlotCond> conds;
    for (const Frame& f : b.frames()) {
        bool holo2 = (f.I & 0b10) != 0, anti2 = (f.J & 0b10) != 0;
        if (holo2 && anti2)
            conds.push_back(SlotCond::Zero);
        else if (holo2)
            conds.push_back(SlotCond::F);
        else if (anti2)
            conds.push_back(SlotCond::Fbar);
        else
            conds.push_back(SlotCond::G);
    }
    if (b.p() > 1 || b.q() > 1) throw TcohomError("G-classes exist only for p,q <= 1");
    return conds;
}

}  // namespace tcohom
