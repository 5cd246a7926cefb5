#include "tcohom/exactfield.hpp"

namespace tcohom {

KElem k_add(const KElem& a, const KElem& b) { return {a.u + b.u, a.v + b.v}; }
KElem k_sub(const KElem& a, const KElem& b) { return {a.u - b.u, a.v - b.v}; }
KElem k_neg(const KElem& a) { return {-a.u, -a.v}; }
KElem k_mul(const KElem& a, const KElem& b, long d) {
    QRatC dd(static_cast<long>(d));
    return {a.u * b.u + dd * (a.v * b.v), a.u * b.v + a.v * b.u};
}
KElem k_inv(const KElem& a, long d) {
    // (u + v sqrt d)^-1 = (u - v sqrt d) / (u^2 - d v^2), denominator in Q(i)
    QRatC dd(static_cast<long>(d));
    QRatC n = a.u * a.u - dd * (a.v * a.v);
    if (n.is_zero()) throw TcohomError("k_inv: zero norm (element is zero or d is square)");
    QRatC ni = n.inv();
    return {a.u * ni, (-a.v) * ni};
}

namespace {

// plain Gaussian elimination over K; returns (rank, echelon, pivot columns)
struct Echelon {
    int rank = 0;
    KMat rows;
    std::vector<int> pivot_cols;
};

Echelon eliminate(KMat m, long d) {
    Echelon e;
    if (m.empty()) return e;
    size_t nrows = m.size(), ncols = m[0].size();
    size_t r = 0;
    for (size_t c = 0; c < ncols && r < nrows; ++c) {
        size_t piv = r;
        while (piv < nrows && m[piv][c].is_zero()) ++piv;
        if (piv == nrows) continue;
        std::swap(m[r], m[piv]);
        KElem inv = k_inv(m[r][c], d);
        for (size_t j = c; j < ncols; ++j) m[r][j] = k_mul(m[r][j], inv, d);
        for (size_t i = 0; i < nrows; ++i) {
            if (i == r || m[i][c].is_zero()) continue;
            KElem f = m[i][c];
            for (size_t j = c; j < ncols; ++j) m[i][j] = k_sub(m[i][j], k_mul(f, m[r][j], d));
        }
        e.pivot_cols.push_back(static_cast<int>(c));
        ++r;
    }
    e.rank = static_cast<int>(r);
    m.resize(r);
    e.rows = std::move(m);
    return e;
}

}  // namespace

int k_rank(KMat m, long d) { return eliminate(std::move(m), d).rank; }

std::vector<std::vector<KElem>> k_kernel(KMat m, long d, int ncols) {
    Echelon e = eliminate(std::move(m), d);
    std::vector<bool> is_pivot(ncols, false);
    for (int c : e.pivot_cols) is_pivot[c] = true;
    std::vector<std::vector<KElem>> out;
    for (int free_c = 0; free_c < ncols; ++free_c) {
        if (is_pivot[free_c]) continue;
        std::vector<KElem> v(ncols);
        v[free_c] = KElem{QRatC(1), QRatC(0)};
        for (int r = 0; r < e.rank; ++r) {
            int pc = e.pivot_cols[r];
            v[pc] = k_neg(e.rows[r][free_c]);
        }
        out.push_back(std::move(v));
    }
    return out;
}

namespace {

std::optional<std::pair<KElem, long>> as_kelem(const RealExpr& x) {
    if (auto* r = x.as_rational()) {
        KElem e;
        e.u.re = mpq_class(static_cast<long>(r->num), static_cast<long>(r->den));
        e.u.re.canonicalize();
        return std::make_pair(e, 0L);
    }
    if (auto* q = x.as_quadratic()) {
        KElem e;
        e.u.re = mpq_class(static_cast<long>(q->a_num), static_cast<long>(q->a_den));
        e.u.re.canonicalize();
        e.v.re = mpq_class(static_cast<long>(q->b_num), static_cast<long>(q->b_den));
        e.v.re.canonicalize();
        return std::make_pair(e, static_cast<long>(q->d));
    }
    return std::nullopt;
}

}  // namespace

std::optional<ExactLatticeData> exact_lattice_data(const Lattice& lat) {
    auto a = as_kelem(lat.tau_re_expr());
    auto b = as_kelem(lat.tau_im_expr());
    auto p = as_kelem(lat.p_expr());
    auto q = as_kelem(lat.q_expr());
    if (!a || !b || !p || !q) return std::nullopt;
    long d = 0;
    for (long cand : {a->second, b->second, p->second, q->second}) {
        if (cand == 0) continue;
        if (d == 0) d = cand;
        else if (d != cand) return std::nullopt;  // mixed quadratic fields: no exact path
    }
    ExactLatticeData ex;
    ex.d = d == 0 ? 2 : d;
    ex.tau_re = a->first;
    ex.tau_im = b->first;
    ex.p = p->first;
    ex.q = q->first;
    return ex;
}

namespace {

// A^sigma / pi and B^sigma / pi as elements of K
KElem alpha_of(const ExactLatticeData& ex, const ModeIndex& s) {
    // (i/Im tau) * ( s1 (Im tau - i Re tau) + s2 (-p (Im tau - i Re tau) - i q) + i s3 )
    long d = ex.d;
    auto i_times = [](const KElem& e) { return KElem{QRatC(mpq_class(-1) * e.u.im, e.u.re), QRatC(mpq_class(-1) * e.v.im, e.v.re)}; };
    KElem w = k_sub(ex.tau_im, i_times(ex.tau_re));  // Im tau - i Re tau
    KElem s1{QRatC(s.s1), QRatC()}, s2{QRatC(s.s2), QRatC()}, s3{QRatC(s.s3), QRatC()};
    KElem term = k_add(k_mul(s1, w, d),
                       k_add(k_mul(s2, k_sub(k_neg(k_mul(ex.p, w, d)), i_times(ex.q)), d), i_times(s3)));
    return k_mul(i_times(k_inv(ex.tau_im, d)), term, d);
}

KElem beta_of(const ModeIndex& s) {  // B/pi = i s2
    KElem e;
    e.u.im = s.s2;
    return e;
}

// coefficient actions divided by pi, in the rescaled basis phi_{k,m} = (pi t4)^k e^{2 pi m t4}:
// (d/dt4)/pi : phi_{k,m} -> k phi_{k-1,m} + 2m phi_{k,m}
struct CoeffOp {
    // image of phi_{k,m} is sum of (k', m', coefficient in K)
    std::vector<std::tuple<int, int, KElem>> operator()(int k, int m) const {
        std::vector<std::tuple<int, int, KElem>> out;
        // c_d * (D/pi) + c_0 * id
        if (!c_d.is_zero()) {
            if (k > 0) {
                KElem e = k_mul(c_d, KElem{QRatC(k), QRatC()}, d);
                out.emplace_back(k - 1, m, e);
            }
            if (m != 0) {
                KElem e = k_mul(c_d, KElem{QRatC(2 * m), QRatC()}, d);
                out.emplace_back(k, m, e);
            }
        }
        if (!c_0.is_zero()) out.emplace_back(k, m, c_0);
        return out;
    }
    KElem c_d, c_0;
    long d;
};

CoeffOp coeff_op_for(SlotCond kind, const ModeIndex& s, long d, bool del_side) {
    // del_z2/pi: (1/(2i)) D/pi + i s2 ; delbar_z2/pi: -(1/(2i)) D/pi + i s2
    CoeffOp op;
    op.d = d;
    KElem half_over_i;  // 1/(2i) = -i/2
    half_over_i.u.im = mpq_class(-1, 2);
    if (del_side) {
        op.c_d = half_over_i;
    } else {
        op.c_d = k_neg(half_over_i);
    }
    op.c_0 = beta_of(s);
    (void)kind;
    return op;
}

}  // namespace

KMat exact_op_matrix(const ExactLatticeData& ex, const ModeIndex& s, OperatorKind op,
                     const BlockBasis& dom, const BlockBasis& tgt) {
    long d = ex.d;
    KMat M(tgt.dim(), std::vector<KElem>(dom.dim()));
    if (tgt.dim() == 0 || dom.dim() == 0) return M;

    auto add_leg_action = [&](int leg, const std::function<std::vector<std::tuple<int, int, KElem>>(int, int)>& act) {
        for (int fi = 0; fi < static_cast<int>(dom.frames().size()); ++fi) {
            Frame nf = dom.frames()[fi];
            int sign = wedge_leg_left(leg, nf);
            if (sign == 0) continue;
            int tfi = tgt.frame_index(nf);
            if (tfi < 0) throw TcohomError("exact_op_matrix: image frame outside target");
            KElem sg{QRatC(sign), QRatC()};
            for (int k = 0; k <= dom.K(); ++k)
                for (int m = -dom.M(); m <= dom.M(); ++m)
                    for (auto& [kk, mm, val] : act(k, m))
                        M[tgt.index(tfi, kk, mm)][dom.index(fi, k, m)] =
                            k_add(M[tgt.index(tfi, kk, mm)][dom.index(fi, k, m)], k_mul(sg, val, d));
        }
    };

    KElem alpha = alpha_of(ex, s);
    switch (op) {
        case OperatorKind::Delbar_z1:
            add_leg_action(2, [&](int k, int m) {
                return std::vector<std::tuple<int, int, KElem>>{{k, m, alpha}};
            });
            break;
        case OperatorKind::Del_z1:
            add_leg_action(0, [&](int k, int m) {
                return std::vector<std::tuple<int, int, KElem>>{{k, m, k_neg(alpha.conj())}};
            });
            break;
        case OperatorKind::Del_z2: {
            CoeffOp co = coeff_op_for(SlotCond::None, s, d, true);
            add_leg_action(1, [co](int k, int m) { return co(k, m); });
            break;
        }
        case OperatorKind::Delbar_z2: {
            CoeffOp co = coeff_op_for(SlotCond::None, s, d, false);
            add_leg_action(3, [co](int k, int m) { return co(k, m); });
            break;
        }
        case OperatorKind::Del: {
            KMat a = exact_op_matrix(ex, s, OperatorKind::Del_z1, dom, tgt);
            KMat b = exact_op_matrix(ex, s, OperatorKind::Del_z2, dom, tgt);
            for (size_t i = 0; i < a.size(); ++i)
                for (size_t j = 0; j < a[i].size(); ++j) M[i][j] = k_add(a[i][j], b[i][j]);
            break;
        }
        case OperatorKind::Delbar: {
            KMat a = exact_op_matrix(ex, s, OperatorKind::Delbar_z1, dom, tgt);
            KMat b = exact_op_matrix(ex, s, OperatorKind::Delbar_z2, dom, tgt);
            for (size_t i = 0; i < a.size(); ++i)
                for (size_t j = 0; j < a[i].size(); ++j) M[i][j] = k_add(a[i][j], b[i][j]);
            break;
        }
        case OperatorKind::DelDelbar: {
            BlockBasis mid(dom.p(), dom.q() + 1, dom.K(), dom.M());
            KMat b = exact_op_matrix(ex, s, OperatorKind::Delbar, dom, mid);
            KMat a = exact_op_matrix(ex, s, OperatorKind::Del, mid, tgt);
            for (int i = 0; i < tgt.dim(); ++i)
                for (int j = 0; j < dom.dim(); ++j) {
                    KElem acc;
                    for (int t = 0; t < mid.dim(); ++t) acc = k_add(acc, k_mul(a[i][t], b[t][j], d));
                    M[i][j] = acc;
                }
            break;
        }
        default:
            throw TcohomError("exact_op_matrix: unsupported operator");
    }
    return M;
}

KMat exact_membership_rows(const ExactLatticeData& ex, const ModeIndex& s, const BlockBasis& b,
                           const std::vector<SlotCond>& per_frame) {
    long d = ex.d;
    if (per_frame.size() != b.frames().size()) throw TcohomError("exact_membership_rows: slot count mismatch");
    int nrows = 0;
    for (auto c : per_frame)
        if (c != SlotCond::None) nrows += b.coeff_dim();
    KMat R(nrows, std::vector<KElem>(b.dim()));
    int row = 0;
    for (size_t fi = 0; fi < per_frame.size(); ++fi) {
        SlotCond cond = per_frame[fi];
        if (cond == SlotCond::None) continue;
        for (int k = 0; k <= b.K(); ++k)
            for (int m = -b.M(); m <= b.M(); ++m) {
                std::vector<std::tuple<int, int, KElem>> img;
                if (cond == SlotCond::Zero) {
                    img.emplace_back(k, m, KElem{QRatC(1), QRatC()});
                } else if (cond == SlotCond::F) {
                    img = coeff_op_for(cond, s, d, false)(k, m);
                } else if (cond == SlotCond::Fbar) {
                    img = coeff_op_for(cond, s, d, true)(k, m);
                } else {  // G: (1/4)(D/pi)^2 + (i s2)^2, uniform pi^2
                    KElem quarter;
                    quarter.u.re = mpq_class(1, 4);
                    // (D/pi)^2 phi_{k,m}
                    auto dphi = [&](int kk, int mm) {
                        std::vector<std::tuple<int, int, KElem>> o;
                        if (kk > 0) o.emplace_back(kk - 1, mm, KElem{QRatC(kk), QRatC()});
                        if (mm != 0) o.emplace_back(kk, mm, KElem{QRatC(2 * mm), QRatC()});
                        return o;
                    };
                    for (auto& [k1, m1, c1] : dphi(k, m))
                        for (auto& [k2, m2, c2] : dphi(k1, m1))
                            img.emplace_back(k2, m2, k_mul(quarter, k_mul(c1, c2, d), d));
                    KElem beta = beta_of(s);
                    KElem b2 = k_mul(beta, beta, d);
                    if (!b2.is_zero()) img.emplace_back(k, m, b2);
                }
                for (auto& [kk, mm, val] : img)
                    R[row + kk * (2 * b.M() + 1) + (mm + b.M())][b.index(static_cast<int>(fi), k, m)] =
                        k_add(R[row + kk * (2 * b.M() + 1) + (mm + b.M())][b.index(static_cast<int>(fi), k, m)], val);
            }
        row += b.coeff_dim();
    }
    return R;
}

}  // namespace tcohom
