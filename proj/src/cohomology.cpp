#include "tcohom/cohomology.hpp"

#include <algorithm>
#include <future>
#include <sstream>
#include <thread>

namespace tcohom {

const char* to_string(Theory t) {
    switch (t) {
        case Theory::DeRham: return "derham";
        case Theory::Dolbeault: return "dolbeault";
        case Theory::DelConjugate: return "delconj";
        case Theory::BottChern: return "bott-chern";
        case Theory::Aeppli: return "aeppli";
        case Theory::Third: return "third";
    }
    return "?";
}

std::optional<Theory> theory_from_string(const std::string& s) {
    if (s == "derham") return Theory::DeRham;
    if (s == "dolbeault") return Theory::Dolbeault;
    if (s == "delconj" || s == "del-conjugate") return Theory::DelConjugate;
    if (s == "bott-chern" || s == "bottchern") return Theory::BottChern;
    if (s == "aeppli") return Theory::Aeppli;
    if (s == "third") return Theory::Third;
    return std::nullopt;
}

std::vector<std::pair<int, int>> theory_slots(Theory t) {
    switch (t) {
        case Theory::DeRham:
            return {{0, -1}, {1, -1}, {2, -1}, {3, -1}, {4, -1}};
        case Theory::Third:
            // only the slots where the middle spot of the d / (del+delbar) complex
            // computes a finite topological invariant on X
            return {{1, 1}, {2, 1}, {1, 2}};
        default: {
            std::vector<std::pair<int, int>> v;
            for (int k = 0; k <= 4; ++k)
                for (int p = std::min(2, k); p >= 0 && k - p <= 2; --p) v.emplace_back(p, k - p);
            return v;
        }
    }
}

std::vector<ModeIndex> shell_modes(int N) {
    std::vector<ModeIndex> v;
    for (int a = -N; a <= N; ++a)
        for (int b = -N; b <= N; ++b)
            for (int c = -N; c <= N; ++c) v.push_back({a, b, c});
    return v;
}

double min_abs_A_in_shell(const Lattice& lat, int N) {
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& s : shell_modes(N)) {
        if (s.is_zero()) continue;
        mn = std::min(mn, std::abs(lat.mode_multiplier_A(s)));
    }
    return mn;
}

namespace {

// ----- double-path linear algebra with relative tolerance + straddle guard -----

int rank_with_tol(const Mat& A, double thr) {
    if (A.rows() == 0 || A.cols() == 0) return 0;
    if (A.cols() > A.rows() + A.rows() / 2) return rank_with_tol(A.adjoint(), thr);
    Eigen::ColPivHouseholderQR<Mat> qr(A);
    int n = static_cast<int>(std::min(A.rows(), A.cols()));
    Mat R = qr.matrixR().topLeftCorner(n, n).template triangularView<Eigen::Upper>();
    double mx = std::abs(R(0, 0));
    if (mx == 0) return 0;
    int rank = 0;
    for (int i = 0; i < n; ++i) {
        double v = std::abs(R(i, i)) / mx;
        if (v > thr * 1e-2 && v < thr * 1e2)
            throw RankToleranceError("singular values straddle the rank tolerance band; increase precision or adjust tol");
        if (v > thr) ++rank;
    }
    return rank;
}

Mat kernel_with_tol(const Mat& A, double thr) {
    if (A.cols() == 0) return Mat::Zero(0, 0);
    if (A.rows() == 0) return Mat::Identity(A.cols(), A.cols());
    Eigen::FullPivLU<Mat> lu(A);
    lu.setThreshold(thr);
    return lu.kernel();
}

// ----- exact-path helpers -----

KMat k_select_cols(const KMat& A, const std::vector<int>& cols) {
    KMat out(A.size(), std::vector<KElem>(cols.size()));
    for (size_t i = 0; i < A.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j) out[i][j] = A[i][cols[j]];
    return out;
}

KMat k_mat_mul(const KMat& A, const KMat& B, long d) {
    size_t n = A.size(), m = B.empty() ? 0 : B[0].size(), inner = B.size();
    KMat out(n, std::vector<KElem>(m));
    for (size_t i = 0; i < n; ++i)
        for (size_t t = 0; t < inner; ++t) {
            if (A[i][t].is_zero()) continue;
            for (size_t j = 0; j < m; ++j) {
                if (B[t][j].is_zero()) continue;
                out[i][j] = k_add(out[i][j], k_mul(A[i][t], B[t][j], d));
            }
        }
    return out;
}

KMat k_from_cols(const std::vector<std::vector<KElem>>& cols, size_t nrows) {
    KMat out(nrows, std::vector<KElem>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j)
        for (size_t i = 0; i < nrows; ++i) out[i][j] = cols[j][i];
    return out;
}

// ----- quotient specification -----

struct NumOp {
    OperatorKind op;
    int tp, tq;
};

struct QuotientSpec {
    std::vector<std::pair<int, int>> ambient;       // numerator ambient blocks
    std::vector<std::vector<NumOp>> num_ops;        // per ambient block
    std::vector<std::vector<SlotCond>> membership;  // per ambient block (may be empty)
    struct Den {
        int dp, dq;
        enum class Dom { Full, Membership, MembershipS0Const, Omega, OmegaBar } dom = Dom::Full;
        std::vector<SlotCond> slots;
        std::vector<std::pair<OperatorKind, int>> comps;  // (op, ambient block index)
    };
    std::vector<Den> dens;
    struct Side {
        int ambient_idx;
        bool anti;  // false: Ker Delbar (holomorphic); true: Ker Del (antiholomorphic)
    };
    std::vector<Side> sides;
};

std::vector<SlotCond> g10_slots() { return {SlotCond::G, SlotCond::F}; }
std::vector<SlotCond> g01_slots() { return {SlotCond::G, SlotCond::Fbar}; }
std::vector<SlotCond> g11_slots() {
    // frames of (1,1) in canonical order: dz1^dzb1, dz1^dzb2, dz2^dzb1, dz2^dzb2
    return {SlotCond::G, SlotCond::Fbar, SlotCond::F, SlotCond::Zero};
}

QuotientSpec aeppli_spec(std::pair<int, int> bd, AeppliRoute route) {
    auto [p, q] = bd;
    QuotientSpec sp;
    sp.ambient = {{p, q}};
    sp.num_ops = {{NumOp{OperatorKind::DelDelbar, p + 1, q + 1}}};
    sp.membership = {{}};
    using Dom = QuotientSpec::Den::Dom;
    bool g_slot = (p <= 1 && q <= 1);
    if (route != AeppliRoute::Definition && g_slot) {
        if (p == 0 && q == 0) sp.membership = {{SlotCond::G}};
        if (p == 1 && q == 0) sp.membership = {g10_slots()};
        if (p == 0 && q == 1) sp.membership = {g01_slots()};
        if (p == 1 && q == 1) {
            sp.membership = {g11_slots()};
            sp.num_ops = {{}};  // cong1_1 numerator is the full G^{1,1} class
        }
    }
    Dom img_dom = Dom::Full;
    if (g_slot && route == AeppliRoute::GComplex) img_dom = Dom::Membership;
    if (g_slot && route == AeppliRoute::Completed) img_dom = Dom::MembershipS0Const;

    if (p == 0 && q == 0) {
        sp.sides = {{0, false}, {0, true}};  // O(X) + Obar(X)
    } else if (q == 0) {                     // (p,0), p >= 1
        sp.dens.push_back({p - 1, 0, img_dom, (p == 1 && img_dom != Dom::Full) ? std::vector<SlotCond>{SlotCond::G} : std::vector<SlotCond>{}, {{OperatorKind::Del, 0}}});
        sp.sides = {{0, false}};  // Omega^p
    } else if (p == 0) {
        sp.dens.push_back({0, q - 1, img_dom, (q == 1 && img_dom != Dom::Full) ? std::vector<SlotCond>{SlotCond::G} : std::vector<SlotCond>{}, {{OperatorKind::Delbar, 0}}});
        sp.sides = {{0, true}};  // Omegabar^q
    } else {
        std::vector<SlotCond> s10 = {}, s01 = {};
        if (p == 1 && q == 1 && img_dom != Dom::Full) {
            s10 = g10_slots();
            s01 = g01_slots();
        }
        sp.dens.push_back({p, q - 1, img_dom, s10, {{OperatorKind::Delbar, 0}}});
        sp.dens.push_back({p - 1, q, img_dom, s01, {{OperatorKind::Del, 0}}});
    }
    // outside the G range the route distinction is empty; Full domains there
    if (!g_slot)
        for (auto& d : sp.dens) d.dom = Dom::Full;
    return sp;
}

QuotientSpec slot_spec(Theory t, std::pair<int, int> slot, AeppliRoute route) {
    QuotientSpec sp;
    using Dom = QuotientSpec::Den::Dom;
    switch (t) {
        case Theory::DeRham: {
            int k = slot.first;
            for (int p = std::min(2, k); p >= 0 && k - p <= 2; --p) sp.ambient.emplace_back(p, k - p);
            sp.num_ops.resize(sp.ambient.size());
            sp.membership.resize(sp.ambient.size());
            for (size_t i = 0; i < sp.ambient.size(); ++i) {
                auto [p, q] = sp.ambient[i];
                sp.num_ops[i] = {NumOp{OperatorKind::Del, p + 1, q}, NumOp{OperatorKind::Delbar, p, q + 1}};
            }
            if (k >= 1) {
                auto idx_of = [&](int p, int q) {
                    for (size_t i = 0; i < sp.ambient.size(); ++i)
                        if (sp.ambient[i] == std::make_pair(p, q)) return static_cast<int>(i);
                    return -1;
                };
                for (int dp = std::min(2, k - 1); dp >= 0 && k - 1 - dp <= 2; --dp) {
                    int dq = k - 1 - dp;
                    QuotientSpec::Den den{dp, dq, Dom::Full, {}, {}};
                    if (int ti = idx_of(dp + 1, dq); ti >= 0) den.comps.push_back({OperatorKind::Del, ti});
                    if (int ti = idx_of(dp, dq + 1); ti >= 0) den.comps.push_back({OperatorKind::Delbar, ti});
                    sp.dens.push_back(std::move(den));
                }
            }
            return sp;
        }
        case Theory::Dolbeault: {
            auto [p, q] = slot;
            sp.ambient = {{p, q}};
            sp.num_ops = {{NumOp{OperatorKind::Delbar, p, q + 1}}};
            sp.membership = {{}};
            if (q >= 1) sp.dens.push_back({p, q - 1, Dom::Full, {}, {{OperatorKind::Delbar, 0}}});
            return sp;
        }
        case Theory::DelConjugate: {
            auto [p, q] = slot;
            sp.ambient = {{p, q}};
            sp.num_ops = {{NumOp{OperatorKind::Del, p + 1, q}}};
            sp.membership = {{}};
            if (p >= 1) sp.dens.push_back({p - 1, q, Dom::Full, {}, {{OperatorKind::Del, 0}}});
            return sp;
        }
        case Theory::BottChern: {
            auto [p, q] = slot;
            sp.ambient = {{p, q}};
            sp.num_ops = {{NumOp{OperatorKind::Del, p + 1, q}, NumOp{OperatorKind::Delbar, p, q + 1}}};
            sp.membership = {{}};
            if (p >= 1 && q >= 1)
                sp.dens.push_back({p - 1, q - 1, Dom::Full, {}, {{OperatorKind::DelDelbar, 0}}});
            else if (p >= 1 && q == 0)
                sp.dens.push_back({p - 1, 0, Dom::Omega, {}, {{OperatorKind::Del, 0}}});
            else if (p == 0 && q >= 1)
                sp.dens.push_back({0, q - 1, Dom::OmegaBar, {}, {{OperatorKind::Delbar, 0}}});
            return sp;
        }
        case Theory::Aeppli:
            return aeppli_spec(slot, route);
        case Theory::Third: {
            auto [p, q] = slot;
            sp.ambient = {{p + 1, q}, {p, q + 1}};
            sp.num_ops = {{NumOp{OperatorKind::Delbar, p + 1, q + 1}}, {NumOp{OperatorKind::Del, p + 1, q + 1}}};
            sp.membership = {{}, {}};
            sp.dens.push_back({p, q, Dom::Full, {}, {{OperatorKind::Del, 0}, {OperatorKind::Delbar, 1}}});
            return sp;
        }
    }
    throw TcohomError("slot_spec: bad theory");
}

// ----- block executors -----

constexpr int kHeadroom = 2;

// per-mode cache of operator matrices and kernel bases, shared across theories
struct ModeCache {
    std::map<std::tuple<int, int, int, int>, Mat> ops;               // (op, p, q, K-window)
    std::map<std::tuple<int, int, int, std::string>, Mat> kernels;   // membership kernels
    std::map<std::tuple<bool, int, int, int>, Mat> sides;            // holo/antiholo kernels
};

struct BlockCtx {
    SpectralForm::LatticePtr lat;
    const ExactLatticeData* ex = nullptr;  // non-null selects the exact path
    ModeIndex s;
    int K, M;
    double thr;
    ModeCache* cache = nullptr;
    // domain headroom for denominator images: integration raises the t4 degree
    // only where the z1-multiplier vanishes; elsewhere the contraction by A is
    // window-exact and headroom 0 computes the same block dimensions
    int hr = kHeadroom;

    void pick_headroom() {
        hr = (s.is_zero() || std::abs(lat->mode_multiplier_A(s)) == 0.0) ? kHeadroom : 0;
    }
};

std::pair<int, int> op_target(OperatorKind op, int p, int q) {
    switch (op) {
        case OperatorKind::Del: return {p + 1, q};
        case OperatorKind::Delbar: return {p, q + 1};
        case OperatorKind::DelDelbar: return {p + 1, q + 1};
        default: throw TcohomError("op_target: unsupported operator");
    }
}

const Mat& cached_op(const BlockCtx& c, OperatorKind op, int p, int q, int Kw) {
    static thread_local ModeCache fallback;
    ModeCache& mc = c.cache ? *c.cache : fallback;
    auto key = std::make_tuple(static_cast<int>(op), p, q, Kw);
    auto it = mc.ops.find(key);
    if (it != mc.ops.end()) return it->second;
    auto [tp, tq] = op_target(op, p, q);
    BlockBasis dom(p, q, Kw, c.M), tgt(tp, tq, Kw, c.M);
    Mat m = op_matrix(c.lat, c.s, op, dom, tgt);
    return mc.ops.emplace(key, std::move(m)).first->second;
}

std::string slots_signature(const std::vector<SlotCond>& slots) {
    std::string sig;
    for (auto sc : slots) sig += static_cast<char>('0' + static_cast<int>(sc));
    return sig;
}

const Mat& cached_membership_kernel(const BlockCtx& c, int p, int q, int Kw,
                                    const std::vector<SlotCond>& slots) {
    static thread_local ModeCache fallback;
    ModeCache& mc = c.cache ? *c.cache : fallback;
    auto key = std::make_tuple(p, q, Kw, slots_signature(slots));
    auto it = mc.kernels.find(key);
    if (it != mc.kernels.end()) return it->second;
    BlockBasis dom(p, q, Kw, c.M);
    Mat rows = membership_rows(c.s, dom, slots);
    Mat ker = rows.rows() ? kernel_with_tol(rows, c.thr) : Mat::Identity(dom.dim(), dom.dim());
    return mc.kernels.emplace(key, std::move(ker)).first->second;
}

const Mat& cached_side_kernel(const BlockCtx& c, bool anti, int p, int q, int Kw) {
    static thread_local ModeCache fallback;
    ModeCache& mc = c.cache ? *c.cache : fallback;
    auto key = std::make_tuple(anti, p, q, Kw);
    auto it = mc.sides.find(key);
    if (it != mc.sides.end()) return it->second;
    Mat ker = kernel_with_tol(cached_op(c, anti ? OperatorKind::Del : OperatorKind::Delbar, p, q, Kw),
                              c.thr);
    return mc.sides.emplace(key, std::move(ker)).first->second;
}

struct RepRequest {
    std::vector<SpectralForm>* out = nullptr;
    double drop_tol = 1e-12;
};

int run_spec_double(const BlockCtx& c, const QuotientSpec& sp, RepRequest reps = {});
int run_spec_exact(const BlockCtx& c, const QuotientSpec& sp);

int run_spec_double(const BlockCtx& c, const QuotientSpec& sp, RepRequest reps) {
    const auto& lat = c.lat;
    // small/big ambient layout
    std::vector<BlockBasis> small_blocks, big_blocks;
    std::vector<int> soff, boff;
    int sdim = 0, bdim = 0;
    for (auto [p, q] : sp.ambient) {
        small_blocks.emplace_back(p, q, c.K, c.M);
        big_blocks.emplace_back(p, q, c.K + c.hr, c.M);
        soff.push_back(sdim);
        boff.push_back(bdim);
        sdim += small_blocks.back().dim();
        bdim += big_blocks.back().dim();
    }
    if (sdim == 0) return 0;

    // numerator: stacked constraint rows over the union of small targets
    std::map<std::pair<int, int>, std::pair<BlockBasis, int>> targets;  // (tp,tq) -> (basis, row offset)
    int nrows = 0;
    for (auto& ops : sp.num_ops)
        for (auto& no : ops)
            if (!targets.count({no.tp, no.tq})) {
                BlockBasis tb(no.tp, no.tq, c.K, c.M);
                targets.emplace(std::make_pair(no.tp, no.tq), std::make_pair(tb, nrows));
                nrows += tb.dim();
            }
    std::vector<Mat> mem_rows(sp.ambient.size());
    int mrows = 0;
    for (size_t i = 0; i < sp.ambient.size(); ++i)
        if (!sp.membership[i].empty()) {
            mem_rows[i] = membership_rows(c.s, small_blocks[i], sp.membership[i]);
            mrows += static_cast<int>(mem_rows[i].rows());
        }
    Mat N = Mat::Zero(nrows + mrows, sdim);
    for (size_t i = 0; i < sp.ambient.size(); ++i)
        for (auto& no : sp.num_ops[i]) {
            auto& [tb, roff] = targets.at({no.tp, no.tq});
            if (tb.dim() == 0) continue;
            N.block(roff, soff[i], tb.dim(), small_blocks[i].dim()) =
                cached_op(c, no.op, sp.ambient[i].first, sp.ambient[i].second, c.K);
        }
    {
        int roff = nrows;
        for (size_t i = 0; i < sp.ambient.size(); ++i)
            if (mem_rows[i].rows() > 0) {
                N.block(roff, soff[i], mem_rows[i].rows(), small_blocks[i].dim()) = mem_rows[i];
                roff += static_cast<int>(mem_rows[i].rows());
            }
    }
    int dim_ker = sdim - rank_with_tol(N, c.thr);
    if (dim_ker == 0 && !reps.out) return 0;

    // denominator columns in big coordinates
    std::vector<Mat> den_cols;
    for (auto& den : sp.dens) {
        BlockBasis dom(den.dp, den.dq, c.K + c.hr, c.M);
        if (dom.dim() == 0) continue;
        Mat basis;  // columns spanning the admissible domain; empty => full domain
        using Dom = QuotientSpec::Den::Dom;
        Dom mode = den.dom;
        if (mode == Dom::MembershipS0Const && !c.s.is_zero()) mode = Dom::Membership;
        switch (mode) {
            case Dom::Full:
                break;
            case Dom::Membership: {
                if (den.slots.empty()) break;  // unrestricted
                basis = cached_membership_kernel(c, den.dp, den.dq, c.K + c.hr, den.slots);
                break;
            }
            case Dom::MembershipS0Const: {
                // sigma = 0: constants only (k = 0, m = 0 per frame)
                std::vector<int> sel;
                for (int fi = 0; fi < static_cast<int>(dom.frames().size()); ++fi) sel.push_back(dom.index(fi, 0, 0));
                basis = Mat::Zero(dom.dim(), sel.size());
                for (size_t j = 0; j < sel.size(); ++j) basis(sel[j], j) = 1.0;
                break;
            }
            case Dom::Omega:
                basis = cached_side_kernel(c, false, den.dp, den.dq, c.K + c.hr);
                break;
            case Dom::OmegaBar:
                basis = cached_side_kernel(c, true, den.dp, den.dq, c.K + c.hr);
                break;
        }
        int ncols = basis.size() ? static_cast<int>(basis.cols()) : dom.dim();
        if (ncols == 0) continue;
        Mat cols = Mat::Zero(bdim, ncols);
        for (auto& [op, ti] : den.comps) {
            const Mat& m = cached_op(c, op, den.dp, den.dq, c.K + c.hr);
            if (m.rows() == 0) continue;
            if (basis.size())
                cols.block(boff[ti], 0, m.rows(), ncols) += m * basis;
            else
                cols.block(boff[ti], 0, m.rows(), ncols) += m;
        }
        den_cols.push_back(std::move(cols));
    }
    for (auto& side : sp.sides) {
        const BlockBasis& b = big_blocks[side.ambient_idx];
        Mat ker = cached_side_kernel(c, side.anti, b.p(), b.q(), c.K + c.hr);
        if (ker.cols() == 0) continue;
        Mat cols = Mat::Zero(bdim, ker.cols());
        cols.block(boff[side.ambient_idx], 0, b.dim(), ker.cols()) = ker;
        den_cols.push_back(std::move(cols));
    }
    int total_cols = 0;
    for (auto& m : den_cols) total_cols += static_cast<int>(m.cols());
    Mat B = Mat::Zero(bdim, total_cols);
    {
        int off = 0;
        for (auto& m : den_cols) {
            B.middleCols(off, m.cols()) = m;
            off += static_cast<int>(m.cols());
        }
    }
    // out rows: big-window coordinates beyond the small window
    std::vector<int> out_rows;
    for (size_t i = 0; i < sp.ambient.size(); ++i) {
        const BlockBasis& bb = big_blocks[i];
        for (int fi = 0; fi < static_cast<int>(bb.frames().size()); ++fi)
            for (int k = c.K + 1; k <= c.K + c.hr; ++k)
                for (int m = -c.M; m <= c.M; ++m) out_rows.push_back(boff[i] + bb.index(fi, k, m));
    }
    int rank_B = total_cols ? rank_with_tol(B, c.thr) : 0;
    int rank_out = 0;
    if (total_cols && !out_rows.empty()) {
        Mat Bo(out_rows.size(), total_cols);
        for (size_t r = 0; r < out_rows.size(); ++r) Bo.row(r) = B.row(out_rows[r]);
        rank_out = rank_with_tol(Bo, c.thr);
    }
    int quotient = dim_ker - (rank_B - rank_out);

    if (reps.out) {
        // representatives: numerator kernel vectors modulo the denominator span in small coords
        Mat Kb = kernel_with_tol(N, c.thr);
        // denominator inside the small window: columns B*y with out(B*y) = 0
        Mat Bs;
        if (total_cols) {
            Mat Bo = Mat::Zero(std::max<size_t>(out_rows.size(), 1), total_cols);
            for (size_t r = 0; r < out_rows.size(); ++r) Bo.row(r) = B.row(out_rows[r]);
            Mat Y = kernel_with_tol(Bo, c.thr);
            Mat Win = B * Y;  // big coords, zero on out rows
            // restrict to small coords
            Bs = Mat::Zero(sdim, Win.cols());
            for (size_t i = 0; i < sp.ambient.size(); ++i) {
                auto ix = small_blocks[i].embed_indices(big_blocks[i]);
                for (int r = 0; r < small_blocks[i].dim(); ++r) Bs.row(soff[i] + r) = Win.row(boff[i] + ix[r]);
            }
        } else {
            Bs = Mat::Zero(sdim, 0);
        }
        // greedy: canonical unit vectors that lie in the kernel first, then kernel basis fill
        std::vector<Vec> chosen;
        Eigen::HouseholderQR<Mat> dummy;
        Mat span = Bs;
        auto extends = [&](const Vec& v) {
            Mat T(sdim, span.cols() + 1);
            if (span.cols()) T.leftCols(span.cols()) = span;
            T.col(span.cols()) = v;
            return rank_with_tol(T, c.thr) > rank_with_tol(span, c.thr);
        };
        auto in_kernel = [&](const Vec& v) {
            if (N.rows() == 0) return true;
            return (N * v).norm() <= c.thr * std::max(1.0, N.norm()) * v.norm() * 100;
        };
        std::vector<Vec> candidates;
        for (int j = 0; j < sdim; ++j) {
            Vec e = Vec::Zero(sdim);
            e[j] = 1.0;
            if (in_kernel(e)) candidates.push_back(e);
        }
        for (int j = 0; j < Kb.cols(); ++j) candidates.push_back(Kb.col(j));
        for (auto& v : candidates) {
            if (static_cast<int>(chosen.size()) >= quotient) break;
            if (!extends(v)) continue;
            Mat ns(sdim, span.cols() + 1);
            if (span.cols()) ns.leftCols(span.cols()) = span;
            ns.col(span.cols()) = v;
            span = ns;
            chosen.push_back(v);
        }
        for (auto& v : chosen) {
            // normalize: leading (canonical order) coefficient 1
            int lead = -1;
            for (int j = 0; j < sdim; ++j)
                if (std::abs(v[j]) > 1e-9 * v.cwiseAbs().maxCoeff()) { lead = j; break; }
            Vec w = (lead >= 0) ? Vec(v / v[lead]) : v;
            // convert (multi-ambient: emit the block pieces as separate forms; single ambient typical)
            for (size_t i = 0; i < sp.ambient.size(); ++i) {
                Vec piece = w.segment(soff[i], small_blocks[i].dim());
                if (piece.cwiseAbs().maxCoeff() <= 1e-12) continue;
                reps.out->push_back(small_blocks[i].to_form(lat, c.s, piece, reps.drop_tol));
            }
        }
    }
    return quotient;
}

int run_spec_exact(const BlockCtx& c, const QuotientSpec& sp) {
    const ExactLatticeData& ex = *c.ex;
    long d = ex.d;
    std::vector<BlockBasis> small_blocks, big_blocks;
    std::vector<int> soff, boff;
    int sdim = 0, bdim = 0;
    for (auto [p, q] : sp.ambient) {
        small_blocks.emplace_back(p, q, c.K, c.M);
        big_blocks.emplace_back(p, q, c.K + c.hr, c.M);
        soff.push_back(sdim);
        boff.push_back(bdim);
        sdim += small_blocks.back().dim();
        bdim += big_blocks.back().dim();
    }
    if (sdim == 0) return 0;

    std::map<std::pair<int, int>, std::pair<BlockBasis, int>> targets;
    int nrows = 0;
    for (auto& ops : sp.num_ops)
        for (auto& no : ops)
            if (!targets.count({no.tp, no.tq})) {
                BlockBasis tb(no.tp, no.tq, c.K, c.M);
                targets.emplace(std::make_pair(no.tp, no.tq), std::make_pair(tb, nrows));
                nrows += tb.dim();
            }
    std::vector<KMat> mem_rows(sp.ambient.size());
    int mrows = 0;
    for (size_t i = 0; i < sp.ambient.size(); ++i)
        if (!sp.membership[i].empty()) {
            mem_rows[i] = exact_membership_rows(ex, c.s, small_blocks[i], sp.membership[i]);
            mrows += static_cast<int>(mem_rows[i].size());
        }
    KMat N(nrows + mrows, std::vector<KElem>(sdim));
    for (size_t i = 0; i < sp.ambient.size(); ++i)
        for (auto& no : sp.num_ops[i]) {
            auto& [tb, roff] = targets.at({no.tp, no.tq});
            if (tb.dim() == 0) continue;
            KMat m = exact_op_matrix(ex, c.s, no.op, small_blocks[i], tb);
            for (int r = 0; r < tb.dim(); ++r)
                for (int col = 0; col < small_blocks[i].dim(); ++col)
                    N[roff + r][soff[i] + col] = k_add(N[roff + r][soff[i] + col], m[r][col]);
        }
    {
        int roff = nrows;
        for (size_t i = 0; i < sp.ambient.size(); ++i)
            for (auto& row : mem_rows[i]) {
                for (int col = 0; col < small_blocks[i].dim(); ++col) N[roff][soff[i] + col] = row[col];
                ++roff;
            }
    }
    int dim_ker = sdim - k_rank(N, d);
    if (dim_ker == 0) return 0;

    std::vector<KMat> den_cols;
    for (auto& den : sp.dens) {
        BlockBasis dom(den.dp, den.dq, c.K + c.hr, c.M);
        if (dom.dim() == 0) continue;
        std::optional<KMat> basis;  // columns; nullopt => full domain
        using Dom = QuotientSpec::Den::Dom;
        Dom mode = den.dom;
        if (mode == Dom::MembershipS0Const && !c.s.is_zero()) mode = Dom::Membership;
        switch (mode) {
            case Dom::Full:
                break;
            case Dom::Membership: {
                KMat rows = exact_membership_rows(ex, c.s, dom, den.slots);
                basis = k_from_cols(k_kernel(rows, d, dom.dim()), dom.dim());
                break;
            }
            case Dom::MembershipS0Const: {
                KMat sel(dom.dim(), std::vector<KElem>(dom.frames().size()));
                for (int fi = 0; fi < static_cast<int>(dom.frames().size()); ++fi)
                    sel[dom.index(fi, 0, 0)][fi] = KElem{QRatC(1), QRatC()};
                basis = sel;
                break;
            }
            case Dom::Omega: {
                BlockBasis tgt(den.dp, den.dq + 1, c.K + c.hr, c.M);
                basis = k_from_cols(
                    k_kernel(exact_op_matrix(ex, c.s, OperatorKind::Delbar, dom, tgt), d, dom.dim()), dom.dim());
                break;
            }
            case Dom::OmegaBar: {
                BlockBasis tgt(den.dp + 1, den.dq, c.K + c.hr, c.M);
                basis = k_from_cols(
                    k_kernel(exact_op_matrix(ex, c.s, OperatorKind::Del, dom, tgt), d, dom.dim()), dom.dim());
                break;
            }
        }
        int ncols = basis ? static_cast<int>((*basis)[0].size()) : dom.dim();
        if (basis && basis->empty()) ncols = 0;
        if (ncols == 0) continue;
        KMat cols(bdim, std::vector<KElem>(ncols));
        for (auto& [op, ti] : den.comps) {
            KMat m = exact_op_matrix(ex, c.s, op, dom, big_blocks[ti]);
            if (basis) m = k_mat_mul(m, *basis, d);
            for (int r = 0; r < big_blocks[ti].dim(); ++r)
                for (int col = 0; col < ncols; ++col) cols[boff[ti] + r][col] = k_add(cols[boff[ti] + r][col], m[r][col]);
        }
        den_cols.push_back(std::move(cols));
    }
    for (auto& side : sp.sides) {
        const BlockBasis& b = big_blocks[side.ambient_idx];
        BlockBasis tgt(b.p() + (side.anti ? 1 : 0), b.q() + (side.anti ? 0 : 1), c.K + c.hr, c.M);
        auto ker = k_kernel(exact_op_matrix(ex, c.s, side.anti ? OperatorKind::Del : OperatorKind::Delbar, b, tgt),
                            d, b.dim());
        if (ker.empty()) continue;
        KMat cols(bdim, std::vector<KElem>(ker.size()));
        for (size_t j = 0; j < ker.size(); ++j)
            for (int r = 0; r < b.dim(); ++r) cols[boff[side.ambient_idx] + r][j] = ker[j][r];
        den_cols.push_back(std::move(cols));
    }
    int total_cols = 0;
    for (auto& m : den_cols) total_cols += m.empty() ? 0 : static_cast<int>(m[0].size());
    if (total_cols == 0) return dim_ker;
    KMat B(bdim, std::vector<KElem>(total_cols));
    {
        int off = 0;
        for (auto& m : den_cols) {
            int w = m.empty() ? 0 : static_cast<int>(m[0].size());
            for (int r = 0; r < bdim; ++r)
                for (int j = 0; j < w; ++j) B[r][off + j] = m[r][j];
            off += w;
        }
    }
    std::vector<int> out_rows;
    for (size_t i = 0; i < sp.ambient.size(); ++i) {
        const BlockBasis& bb = big_blocks[i];
        for (int fi = 0; fi < static_cast<int>(bb.frames().size()); ++fi)
            for (int k = c.K + 1; k <= c.K + c.hr; ++k)
                for (int m = -c.M; m <= c.M; ++m) out_rows.push_back(boff[i] + bb.index(fi, k, m));
    }
    int rank_B = k_rank(B, d);
    KMat Bo(out_rows.size(), std::vector<KElem>(total_cols));
    for (size_t r = 0; r < out_rows.size(); ++r) Bo[r] = B[out_rows[r]];
    int rank_out = k_rank(Bo, d);
    return dim_ker - (rank_B - rank_out);
}

int run_spec(const BlockCtx& c, const QuotientSpec& sp, RepRequest reps = {}) {
    if (c.ex && !reps.out) return run_spec_exact(c, sp);
    return run_spec_double(c, sp, reps);
}

bool probe_theta(const SpectralForm::LatticePtr& lat) {
    ClassifyOptions co;
    co.max_n = 2048;
    return classify_theta(*lat, co).classification == ThetaClass::Theta;
}

}  // namespace

std::map<std::pair<int, int>, int> block_dims(Theory t, const SpectralForm::LatticePtr& lat,
                                              const Truncation& tr, const ModeIndex& s,
                                              const EngineOptions& opts) {
    tr.validate();
    std::optional<ExactLatticeData> ex;
    if (opts.exact) ex = exact_lattice_data(*lat);
    ModeCache cache;
    BlockCtx c{lat, ex ? &*ex : nullptr, s, tr.K, tr.M,
               tr.tol * std::min(1.0, min_abs_A_in_shell(*lat, tr.N)), &cache};
    c.pick_headroom();
    std::map<std::pair<int, int>, int> out;
    for (auto slot : theory_slots(t)) out[slot] = run_spec(c, slot_spec(t, slot, opts.aeppli_route));
    return out;
}

std::vector<CohomologyTable> cohomology_dims_all(const std::vector<Theory>& theories,
                                                 const SpectralForm::LatticePtr& lat,
                                                 const Truncation& tr, const EngineOptions& opts) {
    tr.validate();
    bool theta = opts.theta_known ? *opts.theta_known : probe_theta(lat);
    std::optional<ExactLatticeData> ex;
    if (opts.exact) {
        ex = exact_lattice_data(*lat);
        if (!ex) throw TcohomError("exact rank path requires rational/quadratic lattice data over one sqrt(d)");
    }
    double thr = tr.tol * std::min(1.0, min_abs_A_in_shell(*lat, tr.N));
    auto modes = shell_modes(tr.N);

    using Partial = std::vector<std::map<std::pair<int, int>, int>>;
    int nthreads = opts.threads > 0 ? opts.threads
                                    : std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    nthreads = std::min<int>(nthreads, static_cast<int>(modes.size()));
    std::vector<std::future<Partial>> futs;
    size_t chunk = (modes.size() + nthreads - 1) / nthreads;
    for (int ti = 0; ti < nthreads; ++ti) {
        size_t lo = ti * chunk, hi = std::min(modes.size(), lo + chunk);
        futs.push_back(std::async(std::launch::async, [&, lo, hi] {
            Partial partial(theories.size());
            for (size_t i = lo; i < hi; ++i) {
                ModeCache cache;  // shared across all theories at this mode
                BlockCtx c{lat, ex ? &*ex : nullptr, modes[i], tr.K, tr.M, thr, &cache};
                c.pick_headroom();
                for (size_t j = 0; j < theories.size(); ++j)
                    for (auto slot : theory_slots(theories[j]))
                        partial[j][slot] += run_spec(c, slot_spec(theories[j], slot, opts.aeppli_route));
            }
            return partial;
        }));
    }
    std::vector<CohomologyTable> tables(theories.size());
    for (size_t j = 0; j < theories.size(); ++j) {
        tables[j].theory = theories[j];
        tables[j].truncation = tr;
        tables[j].hausdorff_completed =
            (theories[j] == Theory::Aeppli && opts.aeppli_route == AeppliRoute::Completed);
        tables[j].formal_only = !theta;
        for (auto slot : theory_slots(theories[j])) tables[j].dims[slot] = 0;
    }
    for (auto& f : futs) {
        auto partial = f.get();
        for (size_t j = 0; j < theories.size(); ++j)
            for (auto& [slot, v] : partial[j]) tables[j].dims[slot] += v;
    }
    for (size_t j = 0; j < theories.size(); ++j) {
        if (theories[j] == Theory::DeRham)
            for (auto& [slot, v] : tables[j].dims) tables[j].degree_dims[slot.first] = v;
        if (opts.with_representatives)
            for (auto slot : theory_slots(theories[j]))
                if (slot.second >= 0 && tables[j].dims[slot] > 0)
                    tables[j].representatives[slot] =
                        quotient_representatives(theories[j], lat, tr, slot, opts);
    }
    return tables;
}

CohomologyTable cohomology_dims(Theory t, const SpectralForm::LatticePtr& lat, const Truncation& tr,
                                const EngineOptions& opts) {
    return cohomology_dims_all({t}, lat, tr, opts).front();
}

std::vector<SpectralForm> quotient_representatives(Theory t, const SpectralForm::LatticePtr& lat,
                                                   const Truncation& tr, std::pair<int, int> bidegree,
                                                   const EngineOptions& opts) {
    tr.validate();
    // nonzero-mode blocks are acyclic for theta lattices; classes live at sigma = 0
    std::vector<SpectralForm> reps;
    BlockCtx c{lat, nullptr, ModeIndex{}, tr.K, tr.M,
               tr.tol * std::min(1.0, min_abs_A_in_shell(*lat, tr.N))};
    c.pick_headroom();
    RepRequest rq;
    rq.out = &reps;
    run_spec_double(c, slot_spec(t, bidegree, opts.aeppli_route), rq);
    return reps;
}

std::map<int, int> nondeldelbar_degrees(const SpectralForm::LatticePtr& lat, const Truncation& tr,
                                        const EngineOptions& opts) {
    auto bc = cohomology_dims(Theory::BottChern, lat, tr, opts);
    EngineOptions aopts = opts;
    aopts.aeppli_route = AeppliRoute::Completed;
    auto ae = cohomology_dims(Theory::Aeppli, lat, tr, aopts);
    auto dr = cohomology_dims(Theory::DeRham, lat, tr, opts);
    std::map<int, int> out;
    for (int k = 0; k <= 4; ++k)
        out[k] = bc.total_degree_dim(k) + ae.total_degree_dim(k) - 2 * dr.degree_dims.at(k);
    return out;
}

StabilityReport stability_scan(Theory t, const SpectralForm::LatticePtr& lat,
                               const std::vector<Truncation>& truncs, const EngineOptions& opts) {
    StabilityReport rep;
    if (truncs.empty()) return rep;
    for (auto& tr : truncs) rep.tables.emplace_back(tr, cohomology_dims(t, lat, tr, opts));
    const auto& ref = rep.tables.front().second;
    for (size_t i = 1; i < rep.tables.size(); ++i) {
        const auto& cur = rep.tables[i].second;
        for (auto& [slot, v] : ref.dims) {
            auto it = cur.dims.find(slot);
            int w = it == cur.dims.end() ? -1 : it->second;
            if (w != v) {
                rep.identical = false;
                // locate the offending mode block
                std::string where = "(none)";
                const Truncation& tr = rep.tables[i].first;
                for (auto& s : shell_modes(tr.N)) {
                    auto bd_ref = block_dims(t, lat, rep.tables.front().first, s, opts);
                    auto bd_cur = block_dims(t, lat, tr, s, opts);
                    if (bd_ref[slot] != bd_cur[slot]) {
                        std::ostringstream os;
                        os << "sigma=(" << s.s1 << "," << s.s2 << "," << s.s3 << ")";
                        where = os.str();
                        break;
                    }
                }
                std::ostringstream os;
                os << to_string(t) << " slot (" << slot.first << "," << slot.second << "): " << v
                   << " vs " << w << " at truncation N=" << rep.tables[i].first.N
                   << ",K=" << rep.tables[i].first.K << ",M=" << rep.tables[i].first.M
                   << " first differing block " << where;
                rep.discrepancies.push_back(os.str());
            }
        }
    }
    return rep;
}

}  // namespace tcohom
