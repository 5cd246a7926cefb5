#pragma once

#include "tcohom/coeff.hpp"
#include "tcohom/frame.hpp"

#include <map>
#include <memory>

namespace tcohom {

struct FormLimits {
    int K_max = 4;
    int M_max = 4;
};

struct SheafFlags {
    bool in_F = false;
    bool in_Fbar = false;
    bool in_G = false;
};

// Bidegree-(p,q) form as a finite Fourier-mode sum: entries map
// (sigma, frame) -> coefficient function of t4. Lambda-periodic by construction
// (t1,t2,t3 enter only through characters, t4 is lattice-invariant).
class SpectralForm {
  public:
    using Key = std::pair<ModeIndex, Frame>;
    using LatticePtr = std::shared_ptr<const Lattice>;

    SpectralForm(int p, int q, LatticePtr lattice, FormLimits limits = {});

    int p() const { return p_; }
    int q() const { return q_; }
    int degree() const { return p_ + q_; }
    const LatticePtr& lattice() const { return lattice_; }
    const FormLimits& limits() const { return limits_; }
    const std::map<Key, CoeffFunction>& entries() const { return entries_; }
    bool is_zero() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }

    // accumulate c into the (sigma, frame) slot; enforces bidegree and caps
    void add_entry(const ModeIndex& s, const Frame& f, const CoeffFunction& c);
    const CoeffFunction* coeff(const ModeIndex& s, const Frame& f) const;

    SpectralForm operator+(const SpectralForm& o) const;
    SpectralForm operator*(Complex s) const;
    SpectralForm wedge(const SpectralForm& o) const;
    SpectralForm conjugate() const;

    std::map<Frame, Complex> evaluate(Complex z1, Complex z2) const;

    // largest coefficient magnitude, for relative tolerances
    double max_abs_coeff() const;
    void prune(double rel_tol);

    // membership in the presheaf classes cut out by the z2-direction kernels
    SheafFlags sheaf_membership(double rel_tol = 1e-10) const;

    bool same_shape(const SpectralForm& o, double rel_tol) const;

  private:
    void check_compatible(const SpectralForm& o, const char* what) const;
    int p_, q_;
    LatticePtr lattice_;
    FormLimits limits_;
    std::map<Key, CoeffFunction> entries_;
};

// single-entry convenience builders
SpectralForm make_form(const SpectralForm::LatticePtr& lat, int p, int q, const ModeIndex& s,
                       const Frame& f, const CoeffFunction& c, FormLimits limits = {});
SpectralForm zero_form(const SpectralForm::LatticePtr& lat, int p, int q, FormLimits limits = {});

}  // namespace tcohom
