#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "tcohom/form_io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#ifndef TCOHOM_BIN
#define TCOHOM_BIN "./tcohom"
#endif

namespace fs = std::filesystem;
using namespace tcohom;

namespace {

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    fs::path dir = fs::temp_directory_path() / "tcohom_cli_io";
    fs::create_directories(dir);
    fs::path so = dir / "stdout.txt", se = dir / "stderr.txt";
    std::string cmd = std::string(TCOHOM_BIN) + " " + args + " >" + so.string() + " 2>" + se.string();
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(so);
    r.err = slurp(se);
    return r;
}

fs::path write_tmp(const std::string& name, const std::string& content) {
    fs::path dir = fs::temp_directory_path() / "tcohom_cli_files";
    fs::create_directories(dir);
    fs::path p = dir / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
}

const char* kRationalLattice =
    R"({"tau":{"re":{"rat":[0,1]},"im":{"rat":[1,1]}},"p":{"rat":[1,2]},"q":{"rat":[2,3]}})";
const char* kSqrt2Lattice =
    R"({"tau":{"re":{"rat":[0,1]},"im":{"rat":[1,1]}},"p":{"quad":[0,1,1,1,2]},"q":{"rat":[0,1]}})";

std::shared_ptr<const Lattice> sqrt2_lattice() {
    return std::make_shared<Lattice>(parse_lattice(kSqrt2Lattice));
}

}  // namespace

TEST_CASE("classify: rational pair, sqrt2, missing file, starved decimal") {
    auto rat = write_tmp("rational.json", kRationalLattice);
    auto r1 = run("classify --lattice " + rat.string() + " --max-n 100");
    CHECK(r1.exit_code == 0);
    CHECK(r1.out.find("NotToroidal") != std::string::npos);

    auto s2 = write_tmp("sqrt2.json", kSqrt2Lattice);
    auto r2 = run("classify --lattice " + s2.string() + " --max-n 1000");
    CHECK(r2.exit_code == 0);
    CHECK(r2.out.find("Theta") != std::string::npos);
    CHECK(r2.out.find("C_est") != std::string::npos);

    auto r3 = run("classify --lattice /nonexistent/lattice.json");
    CHECK(r3.exit_code == 64);

    auto dec = write_tmp("dec.json",
                         R"({"tau":{"re":{"rat":[0,1]},"im":{"rat":[1,1]}},"p":{"dec":"1.4142","prec":5},"q":{"rat":[0,1]}})");
    auto r4 = run("classify --lattice " + dec.string() + " --max-n 100000");
    CHECK(r4.exit_code == 2);
}

TEST_CASE("table: text diamonds, csv, formats, determinism") {
    auto r = run("table --theory bott-chern --trunc 1,2,1");
    CHECK(r.exit_code == 0);
    for (const char* cell : {"h_BC^{0,0}=1", "h_BC^{1,0}=2", "h_BC^{0,1}=2", "h_BC^{2,0}=1",
                             "h_BC^{1,1}=3", "h_BC^{0,2}=1", "h_BC^{2,1}=1", "h_BC^{1,2}=1",
                             "h_BC^{2,2}=0"})
        CHECK(r.out.find(cell) != std::string::npos);

    auto ra = run("table --theory aeppli --trunc 1,2,1");
    CHECK(ra.out.find("h_A^{1,1}=4") != std::string::npos);
    CHECK(ra.out.find("Hausdorff-completed") != std::string::npos);

    auto rd = run("table --theory derham --trunc 1,2,1");
    CHECK(rd.out.find("b_0 = 1") != std::string::npos);
    CHECK(rd.out.find("b_1 = 3") != std::string::npos);
    CHECK(rd.out.find("b_2 = 3") != std::string::npos);
    CHECK(rd.out.find("b_3 = 1") != std::string::npos);
    CHECK(rd.out.find("b_4 = 0") != std::string::npos);

    auto rc = run("table --theory dolbeault --trunc 1,2,1 --format csv");
    CHECK(rc.out.rfind("theory,p,q,dim,hausdorff,N,K,M", 0) == 0);
    CHECK(rc.out.find("dolbeault,1,0,2,0,1,2,1") != std::string::npos);
    auto rc2 = run("table --theory dolbeault --trunc 1,2,1 --format csv");
    CHECK(rc.out == rc2.out);  // identical configs produce byte-identical output

    auto rb = run("table --theory nonsense");
    CHECK(rb.exit_code == 64);
}

TEST_CASE("solve: umeno residual file, aeppli11 coefficients, precondition exit code") {
    auto lat = sqrt2_lattice();
    fs::path outdir = fs::temp_directory_path() / "tcohom_cli_solve";
    fs::remove_all(outdir);

    SpectralForm phi = make_form(lat, 2, 1, {0, 0, 0}, Frame{0b11, 0b01}, CoeffFunction::constant(1.0));
    auto ff = write_tmp("top.form.json", serialize_form(phi));
    auto r = run("solve --solver umeno --form " + ff.string() + " --output " + outdir.string());
    CHECK(r.exit_code == 0);
    std::string residual = slurp(outdir / "residual_0.form.json");
    CHECK(residual == serialize_form(phi));  // the class is its own residual
    CHECK(r.out.find("recomposition error: 0") != std::string::npos);

    SpectralForm t4dd = make_form(lat, 1, 1, {0, 0, 0}, Frame{0b01, 0b01}, CoeffFunction::monomial(1, 0));
    auto f2 = write_tmp("t4dd.form.json", serialize_form(t4dd));
    auto r2 = run("solve --solver aeppli11 --form " + f2.string() + " --output " + outdir.string());
    CHECK(r2.exit_code == 0);
    CHECK(r2.out.find("aeppli11 residual coefficients (C1, C2, C3, C4): 0+0i 1+0i 0+0i 0+0i") !=
          std::string::npos);
    CHECK(slurp(outdir / "certificate.json").find("FiniteInput") != std::string::npos);

    SpectralForm notexact = make_form(lat, 1, 1, {0, 0, 0}, Frame{0b01, 0b01}, CoeffFunction::constant(1.0));
    auto f3 = write_tmp("dd.form.json", serialize_form(notexact));
    auto r3 = run("solve --solver deldelbar --form " + f3.string());
    CHECK(r3.exit_code == 3);
    CHECK(r3.err.find("not d-exact") != std::string::npos);
}

TEST_CASE("apply: operator on a form file, inhomogeneous d writes components") {
    auto lat = sqrt2_lattice();
    fs::path outdir = fs::temp_directory_path() / "tcohom_cli_apply";
    fs::remove_all(outdir);
    SpectralForm f = make_form(lat, 1, 0, {0, 0, 0}, Frame{0b01, 0},
                               CoeffFunction::monomial(1, 0, Complex(0, 2)));
    auto ff = write_tmp("t4dz1.form.json", serialize_form(f));
    auto r = run("apply --op d --form " + ff.string() + " --output " + outdir.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(outdir / "result_20.form.json"));
    CHECK(fs::exists(outdir / "result_11.form.json"));
    SpectralForm back = parse_form(slurp(outdir / "result_11.form.json"), lat);
    CHECK(back.coeff({0, 0, 0}, Frame{0b01, 0b10}) != nullptr);

    auto r2 = run("apply --op deldelbar --form " + ff.string() + " --output " + outdir.string());
    CHECK(r2.exit_code == 0);
}

TEST_CASE("diagnose: shells, header-only empty case, wild-like summary") {
    auto r = run("diagnose --shells 4");
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("n,min_abs_A,fitted_envelope", 0) == 0);
    CHECK(r.out.find("theta-like") != std::string::npos);

    auto r0 = run("diagnose --shells 0");
    CHECK(r0.exit_code == 0);
    CHECK(r0.out.rfind("n,min_abs_A", 0) == 0);

    auto rat = write_tmp("rational.json", kRationalLattice);
    auto r2 = run("diagnose --shells 2 --lattice " + rat.string());
    CHECK(r2.exit_code == 3);  // not toroidal
}

TEST_CASE("check: suites pass on the default lattice; seed stability") {
    auto r = run("check --suite identities --seed 7");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("[PASS] identities") != std::string::npos);
    auto r2 = run("check --suite identities --seed 8");
    CHECK(r2.exit_code == 0);
    auto rl = run("check --suite leibniz");
    CHECK(rl.exit_code == 0);
}

TEST_CASE("env TCOHOM_PRECISION overrides precision") {
    auto s2 = write_tmp("sqrt2b.json", kSqrt2Lattice);
    fs::path dir = fs::temp_directory_path() / "tcohom_cli_io";
    fs::create_directories(dir);
    fs::path so = dir / "stdout_env.txt";
    std::string cmd = std::string("TCOHOM_PRECISION=320 ") + TCOHOM_BIN + " classify --lattice " +
                      s2.string() + " --max-n 64 >" + so.string() + " 2>/dev/null";
    int rc = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(slurp(so).find("precision_bits: 320") != std::string::npos);
}
