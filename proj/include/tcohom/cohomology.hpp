#pragma once

#include "tcohom/exactfield.hpp"
#include "tcohom/modebasis.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tcohom {

enum class Theory { DeRham, Dolbeault, DelConjugate, BottChern, Aeppli, Third };
const char* to_string(Theory t);
std::optional<Theory> theory_from_string(const std::string& s);

// Aeppli quotient semantics:
//   Completed  — per-mode reduction residual dimensions (the table values); the
//                sigma=0 denominator takes constant-coefficient primitives only,
//                matching the explicit reduction whose residual spans the table.
//   Definition — numerators/denominators exactly as the defining quotients.
//   GComplex   — the G-complex quotients with unrestricted denominators.
// Definition and GComplex are isomorphic routes and must agree; Completed is
// what the reported (Hausdorff-completed) table carries.
enum class AeppliRoute { Completed, Definition, GComplex };

struct CohomologyTable {
    Theory theory = Theory::Dolbeault;
    std::map<std::pair<int, int>, int> dims;       // bidegree keyed; DeRham uses (k,-1)
    std::map<int, int> degree_dims;                // DeRham view
    bool hausdorff_completed = false;
    bool formal_only = false;                      // lattice not certified theta
    Truncation truncation;
    std::map<std::pair<int, int>, std::vector<SpectralForm>> representatives;

    int total_degree_dim(int k) const {
        int s = 0;
        for (auto& [bd, v] : dims)
            if (bd.second >= 0 && bd.first + bd.second == k) s += v;
        return s;
    }
};

struct EngineOptions {
    bool exact = false;                 // exact Q(i)(sqrt d) ranks when the lattice allows
    bool with_representatives = false;
    int threads = 0;                    // 0: pick automatically
    std::optional<bool> theta_known;    // skip the classification probe for the stamp
    AeppliRoute aeppli_route = AeppliRoute::Completed;
};

// Bidegree slots a theory reports on.
std::vector<std::pair<int, int>> theory_slots(Theory t);

CohomologyTable cohomology_dims(Theory t, const SpectralForm::LatticePtr& lat, const Truncation& tr,
                                const EngineOptions& opts = {});

// One mode sweep for several theories (operator matrices are shared per mode).
std::vector<CohomologyTable> cohomology_dims_all(const std::vector<Theory>& theories,
                                                 const SpectralForm::LatticePtr& lat,
                                                 const Truncation& tr, const EngineOptions& opts = {});

// Cohomology of the single mode block (all slots of the theory).
std::map<std::pair<int, int>, int> block_dims(Theory t, const SpectralForm::LatticePtr& lat,
                                              const Truncation& tr, const ModeIndex& s,
                                              const EngineOptions& opts = {});

std::vector<SpectralForm> quotient_representatives(Theory t, const SpectralForm::LatticePtr& lat,
                                                   const Truncation& tr, std::pair<int, int> bidegree,
                                                   const EngineOptions& opts = {});

// Delta^k = h^k_BC + h^k_A - 2 b_k (Aeppli taken from the completed table).
std::map<int, int> nondeldelbar_degrees(const SpectralForm::LatticePtr& lat, const Truncation& tr,
                                        const EngineOptions& opts = {});

struct StabilityReport {
    bool identical = true;
    std::vector<std::string> discrepancies;
    std::vector<std::pair<Truncation, CohomologyTable>> tables;
};
StabilityReport stability_scan(Theory t, const SpectralForm::LatticePtr& lat,
                               const std::vector<Truncation>& truncs, const EngineOptions& opts = {});

double min_abs_A_in_shell(const Lattice& lat, int N);

// modes of the cubical shell max|sigma_i| <= N, deterministic order
std::vector<ModeIndex> shell_modes(int N);

}  // namespace tcohom
