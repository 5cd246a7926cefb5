#pragma once

#include "tcohom/cohomology.hpp"

#include <array>

namespace tcohom {

struct ConvergenceCertificate {
    enum class Kind { FiniteInput, GeometricMajorant, NotCertified } kind = Kind::FiniteInput;
    double D = 0.0;      // constant in dist <= D |A^sigma|
    double delta = 0.0;  // geometric rate from the theta certificate
    std::vector<double> shell_sums;     // partial sums of |a^sigma| / |A^sigma| over |sigma_2| <= n
    std::vector<double> majorant_sums;  // recorded majorant partial sums (when a majorant exists)
    std::string note;
};
const char* to_string(ConvergenceCertificate::Kind k);

enum class CoverFlag { Periodic, UniversalCoverOnly };
const char* to_string(CoverFlag f);

enum class SolverKind { Umeno, DelDelbar, Dolbeault, Aeppli00, Aeppli01, Aeppli10, Aeppli11 };
const char* to_string(SolverKind k);
std::optional<SolverKind> solver_from_string(const std::string& s);

// Solver output. Conventions per solver (recomposition_error checks them):
//   Umeno:      input = sum(residual) + d(sum(primitives))
//   DelDelbar:  input = deldelbar(primitives[0])
//   Dolbeault:  input = delbar(primitives[0]) + residual[0]
//   Aeppli00:   input = primitives[0] + residual[0]
//   Aeppli01:   input = delbar(primitives[0]) + primitives[1] + residual[0]
//   Aeppli10:   input = del(primitives[0]) + primitives[1] + residual[0]
//   Aeppli11:   input = delbar(primitives[0]) + del(primitives[1]) + residual[0]
// residual holds bidegree components (umeno residuals can span bidegrees).
struct PrimitiveSolution {
    std::vector<SpectralForm> primitives;
    std::vector<SpectralForm> residual;
    ConvergenceCertificate certificate;
    CoverFlag cover_flag = CoverFlag::Periodic;
};

PrimitiveSolution umeno_decompose(const SpectralForm& phi, const Truncation& tr);
PrimitiveSolution deldelbar_primitive(const SpectralForm& phi, const Truncation& tr);
PrimitiveSolution dolbeault_primitive(const SpectralForm& w, const Truncation& tr);
PrimitiveSolution aeppli00_reduce(const SpectralForm& w);
PrimitiveSolution aeppli01_primitive(const SpectralForm& w, const Truncation& tr);
PrimitiveSolution aeppli10_primitive(const SpectralForm& w, const Truncation& tr);
PrimitiveSolution aeppli11_primitive(const SpectralForm& w, const Truncation& tr);

PrimitiveSolution solve(SolverKind k, const SpectralForm& input, const Truncation& tr);

// Residual coefficients (C1, C2, C3, C4) of an aeppli11 solution: the
// dz1^dzbar1 constant and t4 parts, then dz1^dzbar2 and dz2^dzbar1.
std::array<Complex, 4> aeppli11_residual_coeffs(const PrimitiveSolution& sol);

// Pointwise verification of the literal sigma2=0-branch primitive assignments,
// which live on the universal cover (their coefficients carry z2bar and are not
// lattice-periodic term-by-term). Returns the max residual of the displayed
// relations over the sigma2=0 modes of w.
double aeppli11_paper_branch_residual(const SpectralForm& w);

// Convergence certification for per-mode coefficient data. Finite inputs are
// always convergent; a geometric majorant needs a theta certificate and decay
// matching it; otherwise NotCertified. infinite_family treats the data as the
// visible shells of an infinite series and demands honest decay.
ConvergenceCertificate certify_convergence(const std::vector<std::pair<ModeIndex, double>>& mode_l1,
                                           const Lattice& lat,
                                           const std::optional<DiophantineCertificate>& theta,
                                           bool infinite_family = false);

double recomposition_error(const SpectralForm& input, const PrimitiveSolution& sol, SolverKind kind);

}  // namespace tcohom
