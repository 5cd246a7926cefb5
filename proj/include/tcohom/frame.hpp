#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tcohom {

// Wedge monomial dz_I ^ dzbar_J in the canonical order dz1 < dz2 < dzbar1 < dzbar2.
// I, J are bitmasks over {1,2} (bit 0 = leg 1, bit 1 = leg 2). Reordering signs
// are always pushed into coefficients, never stored here.
struct Frame {
    uint8_t I = 0;
    uint8_t J = 0;

    int p() const { return __builtin_popcount(I); }
    int q() const { return __builtin_popcount(J); }
    int degree() const { return p() + q(); }

    bool operator==(const Frame& o) const = default;
    auto operator<=>(const Frame& o) const = default;

    // canonical leg positions 0..3: dz1, dz2, dzbar1, dzbar2
    std::vector<int> legs() const {
        std::vector<int> v;
        for (int i = 0; i < 2; ++i)
            if (I & (1 << i)) v.push_back(i);
        for (int i = 0; i < 2; ++i)
            if (J & (1 << i)) v.push_back(2 + i);
        return v;
    }

    std::string str() const {
        static const char* names[4] = {"dz1", "dz2", "dzb1", "dzb2"};
        std::string s;
        for (int l : legs()) {
            if (!s.empty()) s += "^";
            s += names[l];
        }
        return s.empty() ? "1" : s;
    }
};

// Wedge a single new leg (canonical position 0..3) onto frame from the LEFT.
// Returns sign in {-1,+1} and the enlarged frame, or sign 0 if the leg repeats.
inline int wedge_leg_left(int leg, Frame& f) {
    uint8_t bit = 1 << (leg & 1);
    uint8_t& mask = (leg < 2) ? f.I : f.J;
    if (mask & bit) return 0;
    int crossings = 0;
    for (int l : f.legs())
        if (l < leg) ++crossings;
    mask |= bit;
    return (crossings % 2 == 0) ? 1 : -1;
}

// Full wedge of two frames: concatenate legs of a then b, sort to canonical
// order counting transpositions. sign 0 when a leg repeats.
inline int frame_wedge(const Frame& a, const Frame& b, Frame& out) {
    if ((a.I & b.I) || (a.J & b.J)) return 0;
    std::vector<int> legs = a.legs();
    auto bl = b.legs();
    legs.insert(legs.end(), bl.begin(), bl.end());
    int swaps = 0;
    for (size_t i = 1; i < legs.size(); ++i)
        for (size_t j = i; j > 0 && legs[j - 1] > legs[j]; --j) {
            std::swap(legs[j - 1], legs[j]);
            ++swaps;
        }
    out.I = a.I | b.I;
    out.J = a.J | b.J;
    return (swaps % 2 == 0) ? 1 : -1;
}

// Sign relating conj(dz_I ^ dzbar_J) = dzbar_I ^ dz_J to the canonical
// dz_J ^ dzbar_I: moving |J| dz-legs past |I| dzbar-legs.
inline int conj_sign(const Frame& f) {
    return (f.p() * f.q()) % 2 == 0 ? 1 : -1;
}

// All frames of bidegree (p,q) in canonical (I, J) numeric order.
inline std::vector<Frame> frames_of_bidegree(int p, int q) {
    std::vector<Frame> out;
    for (uint8_t I = 0; I < 4; ++I)
        for (uint8_t J = 0; J < 4; ++J) {
            Frame f{I, J};
            if (f.p() == p && f.q() == q) out.push_back(f);
        }
    return out;
}

}  // namespace tcohom
