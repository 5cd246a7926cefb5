#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tcohom/form_io.hpp"
#include "tcohom/lattice.hpp"

#include <Eigen/Dense>
#include <random>

using namespace tcohom;

namespace {

Lattice sqrt2_lattice() {
    return Lattice(RealExpr::rational(0, 1), RealExpr::rational(1, 1), RealExpr::sqrt_of(2),
                   RealExpr::rational(0, 1));
}

// independent oracle: solve the defining linear system
// z1 e1 + z2 e2 = t1 (1,p) + t2 (0,1) + t3 (tau,q) + t4 i e2 as a real 4x4 system
RealCoords coords_by_linear_solve(const Lattice& lat, Complex z1, Complex z2) {
    Eigen::Matrix4d A;
    // unknowns (t1,t2,t3,t4); rows: Re z1, Im z1, Re z2, Im z2
    A << 1, 0, lat.tau_re(), 0,
        0, 0, lat.tau_im(), 0,
        lat.p(), 1, lat.q(), 0,
        0, 0, 0, 1;
    Eigen::Vector4d b(z1.real(), z1.imag(), z2.real(), z2.imag());
    Eigen::Vector4d t = A.colPivHouseholderQr().solve(b);
    return {t[0], t[1], t[2], t[3]};
}

}  // namespace

TEST_CASE("realexpr evaluation is monotone in precision") {
    RealExpr r = RealExpr::sqrt_of(2);
    double lo = r.evaluate(64).to_double();
    double hi = r.evaluate(256).to_double();
    CHECK(lo == doctest::Approx(hi).epsilon(1e-15));
    CHECK(hi == doctest::Approx(1.4142135623730951));

    RealExpr liou = RealExpr::liouville_factorial(10, 6);
    CHECK(liou.evaluate(128).to_double() == doctest::Approx(0.110001).epsilon(1e-9));
    CHECK_FALSE(liou.is_exact());
    CHECK_FALSE(liou.is_rational());
    CHECK(RealExpr::rational(3, 7).is_rational());
}

TEST_CASE("realexpr invariants reject bad input") {
    CHECK_THROWS_AS(RealExpr::quadratic(0, 1, 1, 1, 4), ParseError);   // perfect square
    CHECK_THROWS_AS(RealExpr::quadratic(0, 1, 0, 1, 2), ParseError);   // b = 0
    CHECK_THROWS_AS(RealExpr::rational(1, 0), ParseError);
}

TEST_CASE("to_real_coords matches the defining linear system") {
    auto lat = sqrt2_lattice();
    // origin maps to origin
    auto t0 = lat.to_real_coords({0, 0}, {0, 0});
    CHECK(t0.t1 == 0);
    CHECK(t0.t2 == 0);
    CHECK(t0.t3 == 0);
    CHECK(t0.t4 == 0);

    // tau = i, p = 0, q = 0: z = (i, 0) gives t3 = 1, t1 = 0, t4 = 0
    Lattice lat0(RealExpr::rational(0, 1), RealExpr::rational(1, 1), RealExpr::rational(0, 1),
                 RealExpr::rational(0, 1));
    auto t = lat0.to_real_coords(Complex(0, 1), Complex(0, 0));
    CHECK(t.t3 == doctest::Approx(1.0));
    CHECK(t.t1 == doctest::Approx(0.0));
    CHECK(t.t4 == doctest::Approx(0.0));
    auto oracle = coords_by_linear_solve(lat0, Complex(0, 1), Complex(0, 0));
    CHECK(t.t2 == doctest::Approx(oracle.t2).epsilon(1e-12));

    // random points against the independent 4x4 solve, general tau
    Lattice lat2(RealExpr::rational(1, 3), RealExpr::rational(7, 5), RealExpr::sqrt_of(2),
                 RealExpr::rational(-2, 7));
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-3, 3);
    for (int i = 0; i < 50; ++i) {
        Complex z1(U(rng), U(rng)), z2(U(rng), U(rng));
        auto a = lat2.to_real_coords(z1, z2);
        auto b = coords_by_linear_solve(lat2, z1, z2);
        CHECK(a.t1 == doctest::Approx(b.t1).epsilon(1e-10));
        CHECK(a.t2 == doctest::Approx(b.t2).epsilon(1e-10));
        CHECK(a.t3 == doctest::Approx(b.t3).epsilon(1e-10));
        CHECK(a.t4 == doctest::Approx(b.t4).epsilon(1e-10));
        auto [w1, w2] = lat2.from_real_coords(a);
        CHECK(std::abs(w1 - z1) < 1e-12);
        CHECK(std::abs(w2 - z2) < 1e-12);
    }
}

TEST_CASE("lattice generators shift (t1,t2,t3) by unit vectors and fix t4") {
    Lattice lat(RealExpr::rational(1, 3), RealExpr::rational(7, 5), RealExpr::sqrt_of(2),
                RealExpr::quadratic(1, 2, -1, 3, 2));
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-2, 2);
    auto gens = lat.generators();
    double expected[3][4] = {{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 1, 0}};
    for (int g = 0; g < 3; ++g) {
        for (int i = 0; i < 10; ++i) {
            Complex z1(U(rng), U(rng)), z2(U(rng), U(rng));
            auto base = lat.to_real_coords(z1, z2);
            auto shifted = lat.to_real_coords(z1 + gens[g].first, z2 + gens[g].second);
            CHECK(shifted.t1 - base.t1 == doctest::Approx(expected[g][0]).epsilon(1e-10));
            CHECK(shifted.t2 - base.t2 == doctest::Approx(expected[g][1]).epsilon(1e-10));
            CHECK(shifted.t3 - base.t3 == doctest::Approx(expected[g][2]).epsilon(1e-10));
            CHECK(shifted.t4 - base.t4 == doctest::Approx(expected[g][3]).epsilon(1e-10));
        }
    }
}

TEST_CASE("degenerate lattice rejected") {
    CHECK_THROWS_AS(Lattice(RealExpr::rational(0, 1), RealExpr::rational(-1, 1), RealExpr::sqrt_of(2),
                            RealExpr::rational(0, 1)),
                    InvalidLatticeError);
}

TEST_CASE("mode multipliers: values, additivity, conjugation, nonvanishing") {
    auto lat = sqrt2_lattice();
    CHECK(std::abs(lat.mode_multiplier_A({0, 0, 0})) == 0.0);
    // sigma = (1,0,0) at tau = i: A = pi i
    Complex a100 = lat.mode_multiplier_A({1, 0, 0});
    CHECK(a100.real() == doctest::Approx(0.0));
    CHECK(a100.imag() == doctest::Approx(3.14159265358979324));

    CHECK(Lattice::mode_multiplier_B({0, 0, 0}) == Complex(0, 0));
    CHECK(Lattice::mode_multiplier_B({0, 3, 0}).imag() == doctest::Approx(3 * 3.14159265358979324));
    CHECK(Lattice::mode_multiplier_B({0, 3, 0}).real() == 0.0);

    // additivity and negation, exhaustive over |sigma_i| <= 3 spot pairs
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> S(-3, 3);
    for (int i = 0; i < 200; ++i) {
        ModeIndex s{S(rng), S(rng), S(rng)}, t{S(rng), S(rng), S(rng)};
        Complex lhs = lat.mode_multiplier_A(s + t);
        Complex rhs = lat.mode_multiplier_A(s) + lat.mode_multiplier_A(t);
        CHECK(std::abs(lhs - rhs) < 1e-12);
        CHECK(std::abs(lat.mode_multiplier_A(-s) + lat.mode_multiplier_A(s)) < 1e-12);
        Complex B = Lattice::mode_multiplier_B(s);
        CHECK(std::conj(B) == -B);
    }
    // nonvanishing off zero for the toroidal lattice
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b)
            for (int c = -3; c <= 3; ++c)
                if (a || b || c) CHECK(std::abs(lat.mode_multiplier_A({a, b, c})) > 1e-6);
}

TEST_CASE("finite-difference oracle for A^sigma as the delbar_z1 multiplier") {
    auto lat = sqrt2_lattice();
    ModeIndex s{1, 2, -1};
    auto character = [&](Complex z1, Complex z2) {
        auto t = lat.to_real_coords(z1, z2);
        double ph = 2 * 3.14159265358979324 * (s.s1 * t.t1 + s.s2 * t.t2 + s.s3 * t.t3);
        return std::polar(1.0, ph);
    };
    Complex z1(0.3, 0.7), z2(-0.2, 0.5);
    double h = 1e-5;
    Complex ddx = (character(z1 + h, z2) - character(z1 - h, z2)) / (2 * h);
    Complex ddy = (character(z1 + Complex(0, h), z2) - character(z1 - Complex(0, h), z2)) / (2 * h);
    Complex delbar = 0.5 * (ddx + Complex(0, 1) * ddy);
    Complex expected = lat.mode_multiplier_A(s) * character(z1, z2);
    CHECK(std::abs(delbar - expected) < 1e-6);
    Complex del = 0.5 * (ddx - Complex(0, 1) * ddy);
    Complex expected_del = -std::conj(lat.mode_multiplier_A(s)) * character(z1, z2);
    CHECK(std::abs(del - expected_del) < 1e-6);
}

TEST_CASE("classify: rational pair is NotToroidal") {
    Lattice lat(RealExpr::rational(0, 1), RealExpr::rational(1, 1), RealExpr::rational(1, 2),
                RealExpr::rational(2, 3));
    CHECK_FALSE(lat.is_toroidal());
    auto cert = classify_theta(lat);
    CHECK(cert.classification == ThetaClass::NotToroidal);
}

TEST_CASE("classify: sqrt(2) and golden ratio are certified Theta with valid certificates") {
    for (auto p : {RealExpr::sqrt_of(2), RealExpr::quadratic(1, 2, 1, 2, 5)}) {
        Lattice lat(RealExpr::rational(0, 1), RealExpr::rational(1, 1), p, RealExpr::rational(0, 1));
        CHECK(lat.is_toroidal());
        ClassifyOptions opts;
        opts.max_n = 4096;
        auto cert = classify_theta(lat, opts);
        REQUIRE(cert.classification == ThetaClass::Theta);
        CHECK(cert.method == DiophantineCertificate::Method::ContinuedFraction);
        CHECK(cert.C_est > 0);
        CHECK(cert.delta_est > 0);
        CHECK(cert.delta_est < 1);
        // every sample satisfies dist >= C delta^n, and samples are strictly increasing in n
        long prev = 0;
        for (auto& [n, dist] : cert.samples) {
            CHECK(n > prev);
            prev = n;
            CHECK(dist >= cert.C_est * std::pow(cert.delta_est, static_cast<double>(n)));
        }
    }
}

TEST_CASE("classify: continued fractions") {
    auto cf2 = continued_fraction(RealExpr::sqrt_of(2));
    REQUIRE(cf2.has_value());
    CHECK(cf2->periodic);
    CHECK(cf2->quotients[0] == 1);
    CHECK(cf2->max_partial == 2);  // sqrt2 = [1;2,2,2,...]
    auto golden = continued_fraction(RealExpr::quadratic(1, 2, 1, 2, 5));
    REQUIRE(golden.has_value());
    CHECK(golden->max_partial == 1);  // [1;1,1,...]
    auto rat = continued_fraction(RealExpr::rational(22, 7));
    REQUIRE(rat.has_value());
    CHECK_FALSE(rat->periodic);
}

TEST_CASE("classify: truncated Liouville input yields WildEvidence") {
    Lattice lat(RealExpr::rational(0, 1), RealExpr::rational(1, 1),
                RealExpr::liouville_factorial(10, 6), RealExpr::rational(0, 1));
    ClassifyOptions opts;
    opts.max_n = 10000;
    auto cert = classify_theta(lat, opts);
    CHECK(cert.classification == ThetaClass::WildEvidence);
    CHECK(cert.method == DiophantineCertificate::Method::BruteForceScan);
    CHECK(!cert.envelope_fits.empty());
}

TEST_CASE("classify: starving decimal precision is Inconclusive") {
    Lattice lat(RealExpr::rational(0, 1), RealExpr::rational(1, 1),
                RealExpr::decimal("1.41421", 6), RealExpr::rational(0, 1));
    ClassifyOptions opts;
    opts.max_n = 100000;
    auto cert = classify_theta(lat, opts);
    CHECK(cert.classification == ThetaClass::Inconclusive);
}

TEST_CASE("divisor decay profile: positive and nonincreasing for theta lattice") {
    auto lat = sqrt2_lattice();
    auto prof = lat.divisor_decay_profile(6);
    REQUIRE(prof.size() == 6);
    for (size_t i = 0; i < prof.size(); ++i) {
        CHECK(prof[i].second > 0);
        if (i) CHECK(prof[i].second <= prof[i - 1].second);
    }
    // single-shell case: minimum over the 26 nonzero modes of the unit shell
    auto one = lat.divisor_decay_profile(1);
    REQUIRE(one.size() == 1);
    double expect = std::numeric_limits<double>::infinity();
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            for (int c = -1; c <= 1; ++c)
                if (a || b || c) expect = std::min(expect, std::abs(lat.mode_multiplier_A({a, b, c})));
    CHECK(one[0].second == doctest::Approx(expect));
}

TEST_CASE("lattice JSON round trip") {
    auto lat = sqrt2_lattice();
    std::string text = serialize_lattice(lat);
    Lattice back = parse_lattice(text);
    CHECK(back == lat);
    CHECK_THROWS_AS(parse_lattice("{\"tau\": 3}"), ParseError);
    Lattice liou = parse_lattice(
        R"({"tau":{"re":{"rat":[0,1]},"im":{"rat":[1,1]}},
            "p":{"liouville":{"base":10,"exponents":"factorial","trunc":6}},
            "q":{"rat":[0,1]}})");
    CHECK(liou.p_expr().as_liouville() != nullptr);
    Lattice dec = parse_lattice(R"({"tau":{"re":{"rat":[0,1]},"im":{"rat":[1,1]}},
                                    "p":{"dec":"3.14159265358979","prec":15},"q":{"rat":[0,1]}})");
    CHECK(dec.p() == doctest::Approx(3.14159265358979));
}
