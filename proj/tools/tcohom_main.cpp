// tcohom: spectral calculus and cohomology engine for 2-dimensional toroidal
// groups C^2 / Lambda_{tau,p,q}. Subcommands: classify, apply, table, solve,
// diagnose, check. Exit codes: 0 success, 2 inconclusive classification,
// 3 solver precondition violation, 64 malformed configuration or input file.
#include "CLI11.hpp"

#include "tcohom/calculus.hpp"
#include "tcohom/cohomology.hpp"
#include "tcohom/form_io.hpp"
#include "tcohom/primitives.hpp"
#include "tcohom/render.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

using namespace tcohom;
namespace fs = std::filesystem;

namespace {

struct RunConfig {
    std::string lattice_file;
    int N = 2, K = 2, M = 2;
    double tol = 1e-9;
    long precision = 128;
    OutputFormat format = OutputFormat::Text;
    std::string output_dir;
    unsigned seed = 1;
    bool exact = false;

    Truncation trunc() const { return Truncation{N, K, M, tol}; }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TcohomError("cannot write file: " + path);
    out << content;
}

std::shared_ptr<const Lattice> load_lattice(const RunConfig& cfg) {
    if (cfg.lattice_file.empty()) {
        // default example lattice: tau = i, p = sqrt(2), q = 0
        return std::make_shared<Lattice>(RealExpr::rational(0, 1), RealExpr::rational(1, 1),
                                         RealExpr::sqrt_of(2), RealExpr::rational(0, 1),
                                         cfg.precision);
    }
    return std::make_shared<Lattice>(parse_lattice(read_file(cfg.lattice_file), cfg.precision));
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    if (cfg.output_dir.empty()) return name;
    fs::create_directories(cfg.output_dir);
    return (fs::path(cfg.output_dir) / name).string();
}

void add_common(CLI::App* cmd, RunConfig& cfg, std::string& trunc_str, std::string& fmt_str) {
    cmd->add_option("--lattice", cfg.lattice_file, "lattice config file (JSON)");
    cmd->add_option("--trunc", trunc_str, "truncation N,K,M (default 2,2,2)");
    cmd->add_option("--tol", cfg.tol, "rank tolerance (relative)");
    cmd->add_option("--precision", cfg.precision, "precision bits for real evaluation");
    cmd->add_option("--format", fmt_str, "output format: text|csv|json");
    cmd->add_option("--output", cfg.output_dir, "directory for emitted files");
    cmd->add_option("--seed", cfg.seed, "seed for randomized subcommands");
    cmd->add_flag("--exact", cfg.exact, "exact quadratic-field ranks where available");
}

void finish_common(RunConfig& cfg, const std::string& trunc_str, const std::string& fmt_str) {
    if (!trunc_str.empty()) {
        if (std::sscanf(trunc_str.c_str(), "%d,%d,%d", &cfg.N, &cfg.K, &cfg.M) != 3)
            throw ParseError("--trunc wants N,K,M");
    }
    if (!fmt_str.empty()) {
        auto f = format_from_string(fmt_str);
        if (!f) throw ParseError("--format wants text|csv|json");
        cfg.format = *f;
    }
    if (const char* env = std::getenv("TCOHOM_PRECISION")) {
        char* end = nullptr;
        long bits = std::strtol(env, &end, 10);
        if (end && *end == '\0' && bits >= 16) cfg.precision = bits;
    }
    cfg.trunc().validate();
}

// ---------- classify ----------

int cmd_classify(const RunConfig& cfg, long max_n, double floor) {
    auto lat = load_lattice(cfg);
    ClassifyOptions opts;
    opts.max_n = max_n;
    opts.geometric_floor = floor;
    opts.prec = std::max<long>(cfg.precision, 192);
    auto cert = classify_theta(*lat, opts);
    switch (cfg.format) {
        case OutputFormat::Text: std::cout << render_certificate_text(cert); break;
        case OutputFormat::Csv: std::cout << render_certificate_csv(cert); break;
        case OutputFormat::Json: std::cout << render_certificate_json(cert); break;
    }
    if (!cfg.output_dir.empty())
        write_file(out_path(cfg, "certificate.csv"), render_certificate_csv(cert));
    return cert.classification == ThetaClass::Inconclusive ? 2 : 0;
}

// ---------- apply ----------

int cmd_apply(const RunConfig& cfg, const std::string& op_name, const std::string& form_file) {
    auto lat = load_lattice(cfg);
    SpectralForm f = parse_form(read_file(form_file), lat);
    FormSum result;
    if (op_name == "del") {
        result.add(apply(OperatorKind::Del, f));
    } else if (op_name == "delbar") {
        result.add(apply(OperatorKind::Delbar, f));
    } else if (op_name == "deldelbar") {
        result.add(apply(OperatorKind::DelDelbar, f));
    } else if (op_name == "d") {
        result = apply_d(f);
    } else {
        throw ParseError("--op wants del|delbar|d|deldelbar");
    }
    if (result.parts.empty()) {
        std::cout << "result: 0\n";
        write_file(out_path(cfg, "result.form.json"),
                   serialize_form(zero_form(lat, std::min(2, f.p() + 1), f.q())));
        return 0;
    }
    int idx = 0;
    for (auto& [bd, g] : result.parts) {
        std::string name = result.parts.size() == 1
                               ? "result.form.json"
                               : "result_" + std::to_string(bd.first) + std::to_string(bd.second) + ".form.json";
        write_file(out_path(cfg, name), serialize_form(g));
        std::cout << "component (" << bd.first << "," << bd.second << "): " << g.size()
                  << " entries -> " << out_path(cfg, name) << "\n";
        ++idx;
    }
    return 0;
}

// ---------- table ----------

void print_table(const RunConfig& cfg, const CohomologyTable& t) {
    switch (cfg.format) {
        case OutputFormat::Text: std::cout << render_table_text(t); break;
        case OutputFormat::Csv: std::cout << render_table_csv(t); break;
        case OutputFormat::Json: std::cout << render_table_json(t); break;
    }
}

int cmd_table(const RunConfig& cfg, const std::string& theory_name) {
    auto lat = load_lattice(cfg);
    EngineOptions opts;
    opts.exact = cfg.exact;
    ClassifyOptions copts;
    copts.max_n = 4096;
    copts.prec = cfg.precision;
    opts.theta_known = classify_theta(*lat, copts).classification == ThetaClass::Theta;
    Truncation tr = cfg.trunc();
    if (theory_name == "all") {
        for (auto t : {Theory::DeRham, Theory::Dolbeault, Theory::DelConjugate, Theory::BottChern,
                       Theory::Aeppli, Theory::Third}) {
            print_table(cfg, cohomology_dims(t, lat, tr, opts));
            if (cfg.format == OutputFormat::Text) std::cout << "\n";
        }
        auto delta = nondeldelbar_degrees(lat, tr, opts);
        std::cout << "Delta^k:";
        for (int k = 0; k <= 4; ++k) std::cout << " " << delta.at(k);
        std::cout << "\n";
        auto third = cohomology_dims(Theory::Third, lat, tr, opts);
        std::cout << "h_T^{(1,1)+1} = " << third.dims.at({1, 1}) << "\n";
        return 0;
    }
    auto t = theory_from_string(theory_name);
    if (!t) throw ParseError("--theory wants derham|dolbeault|delconj|bott-chern|aeppli|third|all");
    print_table(cfg, cohomology_dims(*t, lat, tr, opts));
    return 0;
}

// ---------- solve ----------

int cmd_solve(const RunConfig& cfg, const std::string& solver_name, const std::string& form_file) {
    auto lat = load_lattice(cfg);
    auto kind = solver_from_string(solver_name);
    if (!kind) throw ParseError("--solver wants umeno|deldelbar|dolbeault|aeppli00|aeppli01|aeppli10|aeppli11");
    SpectralForm input = parse_form(read_file(form_file), lat);
    PrimitiveSolution sol = solve(*kind, input, cfg.trunc());
    for (size_t i = 0; i < sol.primitives.size(); ++i)
        write_file(out_path(cfg, "primitive_" + std::to_string(i) + ".form.json"),
                   serialize_form(sol.primitives[i]));
    for (size_t i = 0; i < sol.residual.size(); ++i)
        write_file(out_path(cfg, "residual_" + std::to_string(i) + ".form.json"),
                   serialize_form(sol.residual[i]));
    nlohmann::json cj;
    cj["kind"] = to_string(sol.certificate.kind);
    cj["D"] = sol.certificate.D;
    cj["delta"] = sol.certificate.delta;
    cj["shell_sums"] = sol.certificate.shell_sums;
    cj["majorant_sums"] = sol.certificate.majorant_sums;
    cj["note"] = sol.certificate.note;
    cj["cover_flag"] = to_string(sol.cover_flag);
    write_file(out_path(cfg, "certificate.json"), cj.dump(2) + "\n");

    std::cout << "solver: " << to_string(*kind) << "\n";
    double err = recomposition_error(input, sol, *kind);
    std::cout << "recomposition error: " << format_double(err) << "\n";
    std::cout << "cover: " << to_string(sol.cover_flag) << "\n";
    bool any = false;
    for (auto& r : sol.residual) {
        for (auto& [key, c] : r.entries()) {
            for (auto& [km, v] : c.terms()) {
                std::cout << "residual (" << key.second.str() << ", t4^" << km.first;
                if (km.second) std::cout << " e^{2pi " << km.second << " t4}";
                std::cout << "): " << format_double(v.real()) << (v.imag() < 0 ? "" : "+")
                          << format_double(v.imag()) << "i\n";
                any = true;
            }
        }
    }
    if (!any) std::cout << "residual: 0\n";
    if (*kind == SolverKind::Aeppli11) {
        auto c = aeppli11_residual_coeffs(sol);
        std::cout << "aeppli11 residual coefficients (C1, C2, C3, C4):";
        for (auto& v : c)
            std::cout << " " << format_double(v.real()) << (v.imag() < 0 ? "" : "+")
                      << format_double(v.imag()) << "i";
        std::cout << "\n";
    }
    return 0;
}

// ---------- diagnose ----------

int cmd_diagnose(const RunConfig& cfg, int shells) {
    auto lat = load_lattice(cfg);
    if (!lat->is_toroidal()) throw PreconditionError("diagnose: lattice is not toroidal");
    auto profile = lat->divisor_decay_profile(shells);
    std::vector<double> envelope;
    std::string summary;
    if (!profile.empty()) {
        // polynomial floor c/n fitted from the data; collapse of n*y flags wild-like decay
        double c_fit = std::numeric_limits<double>::infinity(), c_max = 0;
        for (auto& [n, y] : profile) {
            c_fit = std::min(c_fit, n * y);
            c_max = std::max(c_max, n * y);
        }
        for (auto& [n, y] : profile) envelope.push_back(c_fit / n);
        bool wild_like = c_fit < 0.15 * c_max;
        summary = wild_like
                      ? "summary: wild-like decay (small divisors collapse below every stable polynomial floor)"
                      : "summary: decay consistent with a polynomial floor min|A| >= " +
                            format_double(c_fit) + "/n (theta-like)";
    }
    std::string csv = render_decay_csv(profile, envelope);
    std::cout << csv;
    if (!summary.empty()) std::cout << summary << "\n";
    if (!cfg.output_dir.empty()) write_file(out_path(cfg, "decay.csv"), csv);
    return 0;
}

// ---------- check ----------

struct SuiteResult {
    std::string name;
    bool passed = true;
    bool skipped = false;
    std::string note;
};

SpectralForm random_form_for(const SpectralForm::LatticePtr& lat, std::mt19937& rng, int p, int q) {
    std::uniform_int_distribution<int> S(-2, 2), KK(0, 2), MM(-2, 2);
    std::uniform_real_distribution<double> U(-2, 2);
    SpectralForm f(p, q, lat);
    auto frames = frames_of_bidegree(p, q);
    std::uniform_int_distribution<size_t> F(0, frames.size() - 1);
    for (int i = 0; i < 3; ++i) {
        CoeffFunction c;
        c.add_term(KK(rng), MM(rng), Complex(U(rng), U(rng)));
        f.add_entry({S(rng), S(rng), S(rng)}, frames[F(rng)], c);
    }
    return f;
}

int cmd_check(const RunConfig& cfg, const std::string& suite_filter) {
    auto lat = load_lattice(cfg);
    ClassifyOptions copts;
    copts.max_n = 4096;
    copts.prec = cfg.precision;
    bool theta = classify_theta(*lat, copts).classification == ThetaClass::Theta;
    std::vector<SuiteResult> results;
    auto want = [&](const std::string& name) { return suite_filter.empty() || suite_filter == name; };

    if (want("identities")) {
        SuiteResult r{"identities"};
        std::mt19937 rng(cfg.seed);
        std::uniform_int_distribution<int> B(0, 2);
        for (int i = 0; i < 200 && r.passed; ++i) {
            SpectralForm f = random_form_for(lat, rng, B(rng), B(rng));
            double scale = 1.0 + f.max_abs_coeff();
            auto small = [&](const SpectralForm& g) { return g.max_abs_coeff() <= 1e-12 * scale; };
            r.passed = small(apply(OperatorKind::Del, apply(OperatorKind::Del, f))) &&
                       small(apply(OperatorKind::Delbar, apply(OperatorKind::Delbar, f))) &&
                       small(apply(OperatorKind::Del, apply(OperatorKind::Delbar, f)) +
                             apply(OperatorKind::Delbar, apply(OperatorKind::Del, f)));
        }
        results.push_back(r);
    }
    if (want("conjugation")) {
        SuiteResult r{"conjugation"};
        std::mt19937 rng(cfg.seed + 1);
        std::uniform_int_distribution<int> B(0, 2);
        for (int i = 0; i < 100 && r.passed; ++i) {
            SpectralForm f = random_form_for(lat, rng, B(rng), B(rng));
            r.passed = apply(OperatorKind::Delbar, f).conjugate().same_shape(
                           apply(OperatorKind::Del, f.conjugate()), 1e-11) &&
                       f.conjugate().conjugate().same_shape(f, 1e-12);
        }
        results.push_back(r);
    }
    if (want("leibniz")) {
        SuiteResult r{"leibniz"};
        std::mt19937 rng(cfg.seed + 2);
        std::uniform_int_distribution<int> B(0, 1);
        for (int i = 0; i < 60 && r.passed; ++i) {
            SpectralForm f = random_form_for(lat, rng, B(rng), B(rng));
            SpectralForm g = random_form_for(lat, rng, B(rng), B(rng));
            FormSum lhs = apply_d(f.wedge(g));
            FormSum df = apply_d(f), dg = apply_d(g);
            for (auto& [bd, h] : df.parts) lhs.add(h.wedge(g) * Complex(-1.0));
            double sign = (f.degree() % 2 == 0) ? -1.0 : 1.0;
            for (auto& [bd, h] : dg.parts) lhs.add(f.wedge(h) * Complex(sign));
            r.passed = lhs.is_small(1e-10, 1.0 + f.max_abs_coeff() * g.max_abs_coeff());
        }
        results.push_back(r);
    }
    if (want("recomposition")) {
        SuiteResult r{"recomposition"};
        std::mt19937 rng(cfg.seed + 3);
        std::uniform_real_distribution<double> U(-2, 2);
        Truncation tr = cfg.trunc();
        for (int i = 0; i < 40 && r.passed; ++i) {
            // aeppli11 on a generated G-class input
            std::uniform_int_distribution<int> S(-2, 2);
            SpectralForm psi1(1, 0, lat, FormLimits{4, 4});
            ModeIndex s{S(rng), S(rng), S(rng)};
            while (s.is_zero()) s = ModeIndex{S(rng), S(rng), S(rng)};
            CoeffFunction g;
            if (s.s2 == 0) {
                g.add_term(0, 0, Complex(U(rng), U(rng)));
                g.add_term(1, 0, Complex(U(rng), U(rng)));
            } else {
                g.add_term(0, s.s2, Complex(U(rng), U(rng)));
            }
            psi1.add_entry(s, Frame{0b01, 0}, g);
            SpectralForm w = apply(OperatorKind::Delbar, psi1);
            w = w + make_form(lat, 1, 1, {0, 0, 0}, Frame{0b01, 0b01},
                              CoeffFunction::monomial(1, 0, Complex(U(rng), 0)));
            auto sol = aeppli11_primitive(w, tr);
            r.passed = recomposition_error(w, sol, SolverKind::Aeppli11) < 1e-9;
        }
        results.push_back(r);
    }
    if (want("acyclicity")) {
        SuiteResult r{"acyclicity"};
        if (!theta) {
            r.skipped = true;
            r.note = "lattice not certified theta; nonzero-mode acyclicity is a theta property";
        } else {
            std::mt19937 rng(cfg.seed + 4);
            std::uniform_int_distribution<int> S(-4, 4);
            EngineOptions opts;
            opts.theta_known = true;
            Truncation tr = cfg.trunc();
            for (int i = 0; i < 8 && r.passed; ++i) {
                ModeIndex s{S(rng), S(rng), S(rng)};
                if (s.is_zero()) continue;
                for (auto t : {Theory::Dolbeault, Theory::BottChern, Theory::Aeppli}) {
                    for (auto& [slot, v] : block_dims(t, lat, tr, s, opts))
                        if (v != 0) r.passed = false;
                }
            }
        }
        results.push_back(r);
    }
    if (want("stability")) {
        SuiteResult r{"stability"};
        EngineOptions opts;
        opts.theta_known = theta;
        for (auto t : {Theory::BottChern, Theory::Aeppli, Theory::Dolbeault}) {
            auto rep = stability_scan(t, lat, {{1, 2, 1, cfg.tol}, {2, 2, 2, cfg.tol}}, opts);
            if (!rep.identical) r.passed = false;
        }
        results.push_back(r);
    }

    bool all = true;
    for (auto& r : results) {
        std::cout << (r.skipped ? "[SKIP] " : (r.passed ? "[PASS] " : "[FAIL] ")) << r.name;
        if (!r.note.empty()) std::cout << " (" << r.note << ")";
        std::cout << "\n";
        if (!r.skipped && !r.passed) all = false;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tcohom: spectral cohomology engine for 2-dimensional toroidal groups"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string trunc_str, fmt_str;

    auto* c_classify = app.add_subcommand("classify", "theta / wild / not-toroidal classification");
    long max_n = 100000;
    double floor = 0.01;
    c_classify->add_option("--max-n", max_n, "scan range for the Diophantine samples");
    c_classify->add_option("--floor", floor, "geometric floor for envelope fits");
    add_common(c_classify, cfg, trunc_str, fmt_str);

    auto* c_apply = app.add_subcommand("apply", "apply a differential operator to a form file");
    std::string op_name, form_file;
    c_apply->add_option("--op", op_name, "del|delbar|d|deldelbar")->required();
    c_apply->add_option("--form", form_file, "input form file")->required();
    add_common(c_apply, cfg, trunc_str, fmt_str);

    auto* c_table = app.add_subcommand("table", "cohomology dimension tables");
    std::string theory_name;
    c_table->add_option("--theory", theory_name, "derham|dolbeault|delconj|bott-chern|aeppli|third|all")
        ->required();
    add_common(c_table, cfg, trunc_str, fmt_str);

    auto* c_solve = app.add_subcommand("solve", "primitive solvers with residuals and certificates");
    std::string solver_name, solve_form;
    c_solve->add_option("--solver", solver_name, "umeno|deldelbar|dolbeault|aeppli00|aeppli01|aeppli10|aeppli11")
        ->required();
    c_solve->add_option("--form", solve_form, "input form file")->required();
    add_common(c_solve, cfg, trunc_str, fmt_str);

    auto* c_diagnose = app.add_subcommand("diagnose", "small-divisor decay profile");
    int shells = 20;
    c_diagnose->add_option("--shells", shells, "number of mode shells");
    add_common(c_diagnose, cfg, trunc_str, fmt_str);

    auto* c_check = app.add_subcommand("check", "seeded randomized invariant suites");
    std::string suite;
    c_check->add_option("--suite", suite, "run a single suite by name");
    add_common(c_check, cfg, trunc_str, fmt_str);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 64;
    }

    try {
        finish_common(cfg, trunc_str, fmt_str);
        if (c_classify->parsed()) return cmd_classify(cfg, max_n, floor);
        if (c_apply->parsed()) return cmd_apply(cfg, op_name, form_file);
        if (c_table->parsed()) return cmd_table(cfg, theory_name);
        if (c_solve->parsed()) return cmd_solve(cfg, solver_name, solve_form);
        if (c_diagnose->parsed()) return cmd_diagnose(cfg, shells);
        if (c_check->parsed()) return cmd_check(cfg, suite);
    } catch (const PreconditionError& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 64;
    } catch (const RankToleranceError& e) {
        std::cerr << "rank tolerance failure: " << e.what()
                  << " (raise --precision or adjust --tol)\n";
        return 1;
    } catch (const TcohomError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
