#pragma once

#include "tcohom/calculus.hpp"

#include <Eigen/Dense>

namespace tcohom {

// Mode shell radius, t4-polynomial degree cap, exponential index cap, rank tolerance.
struct Truncation {
    int N = 2;
    int K = 2;
    int M = 2;
    double tol = 1e-9;

    void validate() const {
        if (N < 1 || K < 2 || M < 1) throw TcohomError("truncation wants N >= 1, K >= 2, M >= 1");
        if (!(tol > 0 && tol < 1e-3)) throw TcohomError("truncation tol must lie in (0, 1e-3)");
    }
};

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Ordered basis t4^k e^{2 pi m t4} x frame of the (p,q) coefficient space at one
// mode. Deterministic order: frame (canonical), then k ascending, then m ascending.
class BlockBasis {
  public:
    BlockBasis(int p, int q, int K, int M)
        : p_(p), q_(q), K_(K), M_(M), frames_(frames_of_bidegree(p, q)) {}

    int p() const { return p_; }
    int q() const { return q_; }
    int K() const { return K_; }
    int M() const { return M_; }
    const std::vector<Frame>& frames() const { return frames_; }
    int coeff_dim() const { return (K_ + 1) * (2 * M_ + 1); }
    int dim() const { return static_cast<int>(frames_.size()) * coeff_dim(); }

    int frame_index(const Frame& f) const {
        for (size_t i = 0; i < frames_.size(); ++i)
            if (frames_[i] == f) return static_cast<int>(i);
        return -1;
    }
    int index(int fi, int k, int m) const { return (fi * (K_ + 1) + k) * (2 * M_ + 1) + (m + M_); }

    void accumulate(Vec& v, int fi, const CoeffFunction& c) const {
        for (auto& [km, val] : c.terms()) {
            auto [k, m] = km;
            if (k > K_ || std::abs(m) > M_) throw TruncationOverflowError("coefficient outside block window");
            v[index(fi, k, m)] += val;
        }
    }

    Vec to_vector(const SpectralForm& f, const ModeIndex& s) const;
    SpectralForm to_form(const SpectralForm::LatticePtr& lat, const ModeIndex& s, const Vec& v,
                         double drop_tol = 0.0) const;

    // inclusion indices of this basis inside a larger window (same p,q, bigger K/M)
    std::vector<int> embed_indices(const BlockBasis& big) const;

  private:
    int p_, q_, K_, M_;
    std::vector<Frame> frames_;
};

// Matrix of the mode-wise operator action: columns are apply(op, basis_j)
// expanded in the target basis. Target window must contain the image
// (operators in scope never raise k or |m|).
Mat op_matrix(const SpectralForm::LatticePtr& lat, const ModeIndex& s, OperatorKind op,
              const BlockBasis& dom, const BlockBasis& tgt);

// Rows cutting out the coefficient-ODE membership classes on a block:
// slot conditions per frame as used by the presheaves F, Fbar, G.
enum class SlotCond { None, F, Fbar, G, Zero };
Mat membership_rows(const ModeIndex& s, const BlockBasis& basis,
                    const std::vector<SlotCond>& per_frame);

// G-type frame conditions for the designated bidegrees; throws outside them.
std::vector<SlotCond> g_slot_conditions(const BlockBasis& basis);

}  // namespace tcohom
