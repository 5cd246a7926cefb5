// Acceptance suite: runs every acceptance criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit code = number of failures.
#include "tcohom/calculus.hpp"
#include "tcohom/cohomology.hpp"
#include "tcohom/form_io.hpp"
#include "tcohom/primitives.hpp"
#include "tcohom/render.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace tcohom;
namespace fs = std::filesystem;

#ifndef TCOHOM_BIN
#define TCOHOM_BIN "./tcohom"
#endif

namespace {

int g_failures = 0;

void criterion(int number, const std::string& label, const std::function<bool(std::string&)>& body,
               double time_budget_s = 0.0) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && time_budget_s > 0 && secs > time_budget_s) {
        ok = false;
        detail = "exceeded the stated time budget of " + std::to_string(time_budget_s) + " s";
    }
    std::printf("[%s] criterion %2d: %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL", number, label.c_str(),
                secs, detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++g_failures;
}

SpectralForm::LatticePtr sqrt2_lattice() {
    return std::make_shared<Lattice>(RealExpr::rational(0, 1), RealExpr::rational(1, 1),
                                     RealExpr::sqrt_of(2), RealExpr::rational(0, 1));
}

EngineOptions fast_opts() {
    EngineOptions o;
    o.theta_known = true;
    return o;
}

using Dims = std::map<std::pair<int, int>, int>;

Dims diamond(std::initializer_list<int> v) {
    // order: (0,0); (1,0),(0,1); (2,0),(1,1),(0,2); (2,1),(1,2); (2,2)
    auto it = v.begin();
    Dims d;
    d[{0, 0}] = *it++;
    d[{1, 0}] = *it++;
    d[{0, 1}] = *it++;
    d[{2, 0}] = *it++;
    d[{1, 1}] = *it++;
    d[{0, 2}] = *it++;
    d[{2, 1}] = *it++;
    d[{1, 2}] = *it++;
    d[{2, 2}] = *it++;
    return d;
}

std::string run_cli(const std::string& args, int* exit_code = nullptr) {
    fs::path dir = fs::temp_directory_path() / "tcohom_acceptance";
    fs::create_directories(dir);
    fs::path so = dir / "out.txt";
    std::string cmd = std::string(TCOHOM_BIN) + " " + args + " >" + so.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    if (exit_code) *exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream in(so, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Dims parse_csv_dims(const std::string& csv, const std::string& theory) {
    Dims d;
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind(theory + ",", 0) != 0) continue;
        int p, q, dim;
        if (std::sscanf(line.c_str() + theory.size() + 1, "%d,%d,%d", &p, &q, &dim) == 3) d[{p, q}] = dim;
    }
    return d;
}

std::mt19937& arng() {
    static std::mt19937 r(271828);
    return r;
}

Complex rand_c() {
    std::uniform_real_distribution<double> U(-2, 2);
    return {U(arng()), U(arng())};
}

ModeIndex rand_mode(int N = 2, bool nonzero = false) {
    std::uniform_int_distribution<int> S(-N, N);
    ModeIndex s{S(arng()), S(arng()), S(arng())};
    while (nonzero && s.is_zero()) s = ModeIndex{S(arng()), S(arng()), S(arng())};
    return s;
}

SpectralForm random_form(const SpectralForm::LatticePtr& lat, int p, int q, int nentries = 3) {
    std::uniform_int_distribution<int> KK(0, 2), MM(-2, 2);
    SpectralForm f(p, q, lat);
    auto frames = frames_of_bidegree(p, q);
    std::uniform_int_distribution<size_t> F(0, frames.size() - 1);
    for (int i = 0; i < nentries; ++i) {
        CoeffFunction c;
        c.add_term(KK(arng()), MM(arng()), rand_c());
        f.add_entry(rand_mode(), frames[F(arng())], c);
    }
    return f;
}

SpectralForm random_g_function(const SpectralForm::LatticePtr& lat, int nmodes, bool nonzero) {
    SpectralForm f(0, 0, lat, FormLimits{4, 4});
    for (int i = 0; i < nmodes; ++i) {
        ModeIndex s = rand_mode(2, nonzero);
        CoeffFunction c;
        if (s.s2 == 0) {
            c.add_term(0, 0, rand_c());
            c.add_term(1, 0, rand_c());
        } else {
            c.add_term(0, s.s2, rand_c());
            c.add_term(0, -s.s2, rand_c());
        }
        f.add_entry(s, Frame{0, 0}, c);
    }
    return f;
}

SpectralForm random_g10(const SpectralForm::LatticePtr& lat, int nmodes, bool nonzero) {
    SpectralForm f(1, 0, lat, FormLimits{4, 4});
    for (int i = 0; i < nmodes; ++i) {
        ModeIndex s = rand_mode(2, nonzero);
        CoeffFunction g;
        if (s.s2 == 0) {
            g.add_term(0, 0, rand_c());
            g.add_term(1, 0, rand_c());
        } else {
            g.add_term(0, s.s2, rand_c());
            g.add_term(0, -s.s2, rand_c());
        }
        f.add_entry(s, Frame{0b01, 0}, g);
        f.add_entry(s, Frame{0b10, 0}, CoeffFunction::monomial(0, -s.s2, rand_c()));
    }
    return f;
}

SpectralForm random_f_form(const SpectralForm::LatticePtr& lat, int p, int q, int nmodes) {
    SpectralForm f(p, q, lat, FormLimits{4, 4});
    std::vector<Frame> frames;
    for (auto& g : frames_of_bidegree(p, q))
        if (!(g.J & 0b10)) frames.push_back(g);
    std::uniform_int_distribution<size_t> F(0, frames.size() - 1);
    for (int i = 0; i < nmodes; ++i) {
        ModeIndex s = rand_mode();
        f.add_entry(s, frames[F(arng())], CoeffFunction::monomial(0, -s.s2, rand_c()));
    }
    return f;
}

// validation scan: min over n <= max_n of n * dist(Z^2, (np, nq)), high precision
double min_n_dist(const Lattice& lat, long max_n, double C_est, double delta_est, bool* cert_holds) {
    Real pv = lat.p_expr().evaluate(256), qv = lat.q_expr().evaluate(256);
    Real np(256), nq(256);
    double mn = std::numeric_limits<double>::infinity();
    if (cert_holds) *cert_holds = true;
    double logdelta = std::log(delta_est);
    for (long n = 1; n <= max_n; ++n) {
        np = np + pv;
        nq = nq + qv;
        double dist = std::hypot(dist_to_int(np).to_double(), dist_to_int(nq).to_double());
        mn = std::min(mn, dist * n);
        if (cert_holds && std::log(dist) < std::log(C_est) + n * logdelta) *cert_holds = false;
    }
    return mn;
}

}  // namespace

int main() {
    auto lat = sqrt2_lattice();
    const Truncation tr222{2, 2, 2, 1e-9};

    criterion(1, "Bott-Chern table (Theorem values, CLI, trunc 2,2,2, < 10 s)", [&](std::string& why) {
        int rc = 0;
        std::string csv = run_cli("table --theory bott-chern --trunc 2,2,2 --format csv", &rc);
        auto dims = parse_csv_dims(csv, "bott-chern");
        auto expect = diamond({1, 2, 2, 1, 3, 1, 1, 1, 0});
        if (rc != 0 || dims != expect) {
            why = "cli table mismatch";
            return false;
        }
        return true;
    }, 10.0);

    criterion(2, "Aeppli table (Hausdorff-completed values, CLI, < 10 s)", [&](std::string& why) {
        int rc = 0;
        std::string csv = run_cli("table --theory aeppli --trunc 2,2,2 --format csv", &rc);
        auto dims = parse_csv_dims(csv, "aeppli");
        auto expect = diamond({1, 1, 1, 0, 4, 0, 0, 0, 0});
        if (rc != 0 || dims != expect) {
            why = "cli table mismatch";
            return false;
        }
        std::string text = run_cli("table --theory aeppli --trunc 2,2,2");
        if (text.find("Hausdorff-completed") == std::string::npos) {
            why = "missing Hausdorff-completed stamp";
            return false;
        }
        return true;
    }, 10.0);

    criterion(3, "Dolbeault, del-conjugate, de Rham tables", [&](std::string& why) {
        auto dol = cohomology_dims(Theory::Dolbeault, lat, tr222, fast_opts());
        auto dc = cohomology_dims(Theory::DelConjugate, lat, tr222, fast_opts());
        auto dr = cohomology_dims(Theory::DeRham, lat, tr222, fast_opts());
        bool ok = dol.dims == diamond({1, 2, 1, 1, 2, 0, 1, 0, 0}) &&
                  dc.dims == diamond({1, 1, 2, 0, 2, 1, 0, 1, 0}) &&
                  dr.degree_dims == std::map<int, int>{{0, 1}, {1, 3}, {2, 3}, {3, 1}, {4, 0}};
        if (!ok) why = "table mismatch";
        return ok;
    });

    criterion(4, "derived scalars Delta^k = (0,0,3,0,0) and h_T^{(1,1)+1} = 1", [&](std::string& why) {
        auto delta = nondeldelbar_degrees(lat, tr222, fast_opts());
        auto third = cohomology_dims(Theory::Third, lat, tr222, fast_opts());
        bool ok = delta == std::map<int, int>{{0, 0}, {1, 0}, {2, 3}, {3, 0}, {4, 0}} &&
                  third.dims.at({1, 1}) == 1;
        if (!ok) why = "scalar mismatch";
        return ok;
    });

    criterion(5, "truncation stability across (1,2,1), (2,2,2), (3,3,3), < 60 s", [&](std::string& why) {
        std::vector<Truncation> truncs{{1, 2, 1, 1e-9}, {2, 2, 2, 1e-9}, {3, 3, 3, 1e-9}};
        std::vector<Theory> theories{Theory::DeRham, Theory::Dolbeault, Theory::DelConjugate,
                                     Theory::BottChern, Theory::Aeppli, Theory::Third};
        std::vector<std::vector<CohomologyTable>> per_trunc;
        for (auto& tr : truncs) per_trunc.push_back(cohomology_dims_all(theories, lat, tr, fast_opts()));
        for (size_t i = 1; i < per_trunc.size(); ++i)
            for (size_t j = 0; j < theories.size(); ++j)
                if (per_trunc[i][j].dims != per_trunc[0][j].dims) {
                    why = std::string(to_string(theories[j])) + " differs at truncation " +
                          std::to_string(truncs[i].N);
                    return false;
                }
        return true;
    }, 60.0);

    criterion(6, "Hodge decomposition b_k = sum h_dbar^{p,q}", [&](std::string& why) {
        auto dol = cohomology_dims(Theory::Dolbeault, lat, tr222, fast_opts());
        auto dr = cohomology_dims(Theory::DeRham, lat, tr222, fast_opts());
        for (int k = 0; k <= 4; ++k)
            if (dr.degree_dims.at(k) != dol.total_degree_dim(k)) {
                why = "k = " + std::to_string(k);
                return false;
            }
        return true;
    });

    criterion(7, "operator identities on 1000 forms; finite-difference oracle on 100 pairs",
              [&](std::string& why) {
                  arng().seed(1000007);
                  for (int i = 0; i < 1000; ++i) {
                      std::uniform_int_distribution<int> B(0, 2);
                      SpectralForm f = random_form(lat, B(arng()), B(arng()));
                      double scale = 1.0 + f.max_abs_coeff();
                      SpectralForm d2 = apply(OperatorKind::Del, apply(OperatorKind::Del, f));
                      SpectralForm db2 = apply(OperatorKind::Delbar, apply(OperatorKind::Delbar, f));
                      SpectralForm mixed = apply(OperatorKind::Del, apply(OperatorKind::Delbar, f)) +
                                           apply(OperatorKind::Delbar, apply(OperatorKind::Del, f));
                      FormSum df = apply_d(f);
                      FormSum ddf;
                      for (auto& [bd, g] : df.parts) {
                          FormSum dg = apply_d(g);
                          for (auto& [b2, h] : dg.parts) ddf.add(h);
                      }
                      if (d2.max_abs_coeff() > 1e-12 * scale || db2.max_abs_coeff() > 1e-12 * scale ||
                          mixed.max_abs_coeff() > 1e-12 * scale || !ddf.is_small(1e-12, scale)) {
                          why = "identity residual at trial " + std::to_string(i);
                          return false;
                      }
                  }
                  // oracle agreement on 100 (form, point) pairs
                  std::uniform_real_distribution<double> U(-1, 1);
                  const double h = 1e-4;
                  for (int i = 0; i < 100; ++i) {
                      std::uniform_int_distribution<int> B(0, 1);
                      SpectralForm f = random_form(lat, B(arng()), B(arng()), 1);
                      Complex z1(U(arng()), U(arng())), z2(U(arng()), U(arng()));
                      struct OpSpec {
                          OperatorKind op;
                          int leg;
                          bool on_z1, bar;
                      };
                      for (OpSpec spec : std::initializer_list<OpSpec>{
                               {OperatorKind::Del_z1, 0, true, false},
                               {OperatorKind::Del_z2, 1, false, false},
                               {OperatorKind::Delbar_z1, 2, true, true},
                               {OperatorKind::Delbar_z2, 3, false, true}}) {
                          SpectralForm img = apply(spec.op, f);
                          if (img.is_zero()) continue;
                          auto img_vals = img.evaluate(z1, z2);
                          for (auto& [key, c] : f.entries()) {
                              Frame nf = key.second;
                              int sign = wedge_leg_left(spec.leg, nf);
                              if (sign == 0) continue;
                              auto coeff_at = [&](Complex w1, Complex w2) {
                                  return f.evaluate(w1, w2).at(key.second);
                              };
                              auto diff = [&](Complex dir) {
                                  auto at = [&](double mult) {
                                      Complex s1 = z1 + (spec.on_z1 ? dir * mult : Complex(0));
                                      Complex s2 = z2 + (spec.on_z1 ? Complex(0) : dir * mult);
                                      return coeff_at(s1, s2);
                                  };
                                  return (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12 * h);
                              };
                              Complex deriv = spec.bar
                                                  ? 0.5 * (diff(Complex(1, 0)) + Complex(0, 1) * diff(Complex(0, 1)))
                                                  : 0.5 * (diff(Complex(1, 0)) - Complex(0, 1) * diff(Complex(0, 1)));
                              Complex expected = Complex(sign) * deriv;
                              if (std::abs(img_vals.at(nf) - expected) > 1e-6 * (1.0 + std::abs(expected))) {
                                  why = "oracle disagreement at pair " + std::to_string(i);
                                  return false;
                              }
                          }
                      }
                  }
                  return true;
              });

    criterion(8, "mode acyclicity on 200 random nonzero modes, shell N = 5", [&](std::string& why) {
        arng().seed(8);
        std::uniform_int_distribution<int> S(-5, 5);
        Truncation tr{2, 2, 2, 1e-9};
        int tested = 0;
        while (tested < 200) {
            ModeIndex s{S(arng()), S(arng()), S(arng())};
            if (s.is_zero()) continue;
            ++tested;
            for (auto t : {Theory::DeRham, Theory::Dolbeault, Theory::DelConjugate, Theory::BottChern,
                           Theory::Aeppli, Theory::Third}) {
                for (auto& [slot, v] : block_dims(t, lat, tr, s, fast_opts()))
                    if (v != 0) {
                        std::ostringstream os;
                        os << to_string(t) << " (" << slot.first << "," << slot.second << ") at sigma=("
                           << s.s1 << "," << s.s2 << "," << s.s3 << ") -> " << v;
                        why = os.str();
                        return false;
                    }
            }
        }
        return true;
    });

    criterion(9, "solver round trips, 100 inputs each; gauge-independent residual bytes",
              [&](std::string& why) {
                  arng().seed(909);
                  auto fail = [&](const char* solver, int i) {
                      why = std::string(solver) + " trial " + std::to_string(i);
                      return false;
                  };
                  for (int i = 0; i < 100; ++i) {
                      // umeno: constant classes plus a deldelbar-exact tail
                      SpectralForm eta = random_g_function(lat, 2, false);
                      SpectralForm phi = apply(OperatorKind::DelDelbar, eta);
                      phi = phi + make_form(lat, 1, 1, {0, 0, 0}, Frame{0b01, 0b01},
                                            CoeffFunction::constant(rand_c()));
                      auto su = umeno_decompose(phi, tr222);
                      if (recomposition_error(phi, su, SolverKind::Umeno) > 1e-9) return fail("umeno", i);

                      // deldelbar on exact forms
                      if (!phi.is_zero()) {
                          SpectralForm dd = apply(OperatorKind::DelDelbar, eta);
                          if (!dd.is_zero()) {
                              auto sd = deldelbar_primitive(dd, tr222);
                              if (recomposition_error(dd, sd, SolverKind::DelDelbar) > 1e-9)
                                  return fail("deldelbar", i);
                          }
                      }

                      // dolbeault on F-class closed forms
                      SpectralForm w = apply(OperatorKind::Delbar, random_f_form(lat, 1, 0, 2));
                      w = w + make_form(lat, 1, 1, {0, 0, 0}, Frame{0b01, 0b01},
                                        CoeffFunction::constant(rand_c()));
                      if (w.sheaf_membership().in_F && is_closed(OperatorKind::Delbar, w, 1e-9)) {
                          auto sw = dolbeault_primitive(w, tr222);
                          if (recomposition_error(w, sw, SolverKind::Dolbeault) > 1e-9)
                              return fail("dolbeault", i);
                      }

                      // aeppli00
                      CoeffFunction aff;
                      aff.add_term(0, 0, rand_c());
                      aff.add_term(1, 0, rand_c());
                      SpectralForm w00 = make_form(lat, 0, 0, {0, 0, 0}, Frame{0, 0}, aff);
                      auto s00 = aeppli00_reduce(w00);
                      if (recomposition_error(w00, s00, SolverKind::Aeppli00) > 1e-9)
                          return fail("aeppli00", i);

                      // aeppli01 / aeppli10
                      SpectralForm w01 = apply(OperatorKind::Delbar, random_g_function(lat, 2, true));
                      w01 = w01 + make_form(lat, 0, 1, {0, 0, 0}, Frame{0, 0b01},
                                            CoeffFunction::monomial(1, 0, rand_c()));
                      auto s01 = aeppli01_primitive(w01, tr222);
                      if (recomposition_error(w01, s01, SolverKind::Aeppli01) > 1e-9)
                          return fail("aeppli01", i);
                      SpectralForm w10 = w01.conjugate();
                      auto s10 = aeppli10_primitive(w10, tr222);
                      if (recomposition_error(w10, s10, SolverKind::Aeppli10) > 1e-9)
                          return fail("aeppli10", i);

                      // aeppli11 with a gauge-moved rebuild: identical residual bytes
                      SpectralForm psi1 = random_g10(lat, 2, true);
                      SpectralForm psi2 = random_g10(lat, 2, true).conjugate();
                      SpectralForm w11 = apply(OperatorKind::Delbar, psi1) + apply(OperatorKind::Del, psi2);
                      w11 = w11 + make_form(lat, 1, 1, {0, 0, 0}, Frame{0b01, 0b01},
                                            CoeffFunction::monomial(1, 0, rand_c()));
                      w11 = w11 + make_form(lat, 1, 1, {0, 0, 0}, Frame{0b10, 0b01},
                                            CoeffFunction::constant(rand_c()));
                      if (!w11.sheaf_membership().in_G) return fail("aeppli11-gen", i);
                      auto s11 = aeppli11_primitive(w11, tr222);
                      if (recomposition_error(w11, s11, SolverKind::Aeppli11) > 1e-9)
                          return fail("aeppli11", i);
                      SpectralForm u = random_g_function(lat, 1, true);
                      SpectralForm w11b = apply(OperatorKind::Delbar, psi1 + apply(OperatorKind::Del, u)) +
                                          apply(OperatorKind::Del, psi2 + apply(OperatorKind::Delbar, u)) +
                                          (w11 + (apply(OperatorKind::Delbar, psi1) +
                                                  apply(OperatorKind::Del, psi2)) *
                                                     Complex(-1.0));
                      w11b.prune(1e-13);
                      auto s11b = aeppli11_primitive(w11b, tr222);
                      if (serialize_form(s11.residual[0]) != serialize_form(s11b.residual[0]))
                          return fail("aeppli11-residual-bytes", i);
                  }
                  return true;
              });

    criterion(10, "classification: sqrt2 and golden Theta (validated to 1e5), rational NotToroidal, Liouville WildEvidence, < 30 s",
              [&](std::string& why) {
                  for (auto pexpr : {RealExpr::sqrt_of(2), RealExpr::quadratic(1, 2, 1, 2, 5)}) {
                      Lattice l(RealExpr::rational(0, 1), RealExpr::rational(1, 1), pexpr,
                                RealExpr::rational(0, 1));
                      ClassifyOptions opts;
                      opts.max_n = 1024;
                      auto cert = classify_theta(l, opts);
                      if (cert.classification != ThetaClass::Theta) {
                          why = "not certified theta";
                          return false;
                      }
                      bool cert_holds = true;
                      double mn = min_n_dist(l, 100000, cert.C_est, cert.delta_est, &cert_holds);
                      if (!(mn > 0.2) || !cert_holds) {
                          why = "brute-force validation failed: min n*dist = " + std::to_string(mn);
                          return false;
                      }
                  }
                  Lattice rat(RealExpr::rational(0, 1), RealExpr::rational(1, 1),
                              RealExpr::rational(1, 2), RealExpr::rational(2, 3));
                  if (classify_theta(rat).classification != ThetaClass::NotToroidal) {
                      why = "rational pair misclassified";
                      return false;
                  }
                  Lattice liou(RealExpr::rational(0, 1), RealExpr::rational(1, 1),
                               RealExpr::liouville_factorial(10, 6), RealExpr::rational(0, 1));
                  ClassifyOptions opts;
                  opts.max_n = 10000;
                  if (classify_theta(liou, opts).classification != ThetaClass::WildEvidence) {
                      why = "Liouville input not flagged WildEvidence";
                      return false;
                  }
                  return true;
              },
              30.0);

    criterion(11, "two-route Aeppli agreement at (0,0), (0,1), (1,1)", [&](std::string& why) {
        EngineOptions def = fast_opts(), gcx = fast_opts();
        def.aeppli_route = AeppliRoute::Definition;
        gcx.aeppli_route = AeppliRoute::GComplex;
        Truncation tr{2, 2, 2, 1e-9};
        auto td = cohomology_dims(Theory::Aeppli, lat, tr, def);
        auto tg = cohomology_dims(Theory::Aeppli, lat, tr, gcx);
        for (auto slot : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
            if (td.dims.at(slot) != tg.dims.at(slot)) {
                why = "mismatch at (" + std::to_string(slot.first) + "," + std::to_string(slot.second) +
                      "): " + std::to_string(td.dims.at(slot)) + " vs " + std::to_string(tg.dims.at(slot));
                return false;
            }
        }
        return true;
    });

    std::printf("%s: %d/11 criteria passed\n", g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                11 - g_failures);
    return g_failures;
}
