#pragma once

#include "tcohom/form.hpp"

#include <map>

namespace tcohom {

enum class OperatorKind { Del, Delbar, D, DelDelbar, Del_z1, Delbar_z1, Del_z2, Delbar_z2 };

const char* to_string(OperatorKind op);

// Finite sum of homogeneous forms keyed by bidegree (what d produces).
struct FormSum {
    std::map<std::pair<int, int>, SpectralForm> parts;
    void add(SpectralForm part);
    bool empty() const { return parts.empty(); }
    bool is_small(double tol, double scale) const;
};

// Mode-wise action on an entry (sigma, frame, a):
//   delbar_z1: a -> A^sigma a, new leg dzbar1
//   del_z1:    a -> -conj(A^sigma) a, new leg dz1
//   del_z2:    a -> (1/(2i)) a' + B^sigma a, new leg dz2
//   delbar_z2: a -> -(1/(2i)) a' + B^sigma a, new leg dzbar2
// New legs wedge from the left; reordering signs go into the coefficient.
// Degree overflow past bidegree 2 in either index vanishes (dimension 2).
// apply(D, f) only when one of the two components vanishes; otherwise apply_d.
SpectralForm apply(OperatorKind op, const SpectralForm& f);
FormSum apply_d(const SpectralForm& f);

bool is_closed(OperatorKind op, const SpectralForm& f, double tol = 1e-10);

}  // namespace tcohom
