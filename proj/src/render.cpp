#include "tcohom/render.hpp"

#include "tcohom/form_io.hpp"

#include "json.hpp"

#include <iomanip>
#include <sstream>

namespace tcohom {

using nlohmann::json;

std::optional<OutputFormat> format_from_string(const std::string& s) {
    if (s == "text") return OutputFormat::Text;
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    return std::nullopt;
}

namespace {

const char* theory_symbol(Theory t) {
    switch (t) {
        case Theory::DeRham: return "b";
        case Theory::Dolbeault: return "h_db";
        case Theory::DelConjugate: return "h_d";
        case Theory::BottChern: return "h_BC";
        case Theory::Aeppli: return "h_A";
        case Theory::Third: return "h_T";
    }
    return "h";
}

}  // namespace

std::string render_table_text(const CohomologyTable& t) {
    std::ostringstream os;
    os << "theory: " << to_string(t.theory) << "   truncation: N=" << t.truncation.N
       << " K=" << t.truncation.K << " M=" << t.truncation.M << "\n";
    if (t.formal_only) os << "note: lattice not certified theta; table is formal/truncated only\n";
    if (t.theory == Theory::DeRham) {
        for (int k = 0; k <= 4; ++k) {
            os << "b_" << k << " = " << t.degree_dims.at(k);
            os << (k < 4 ? "   " : "\n");
        }
        return os.str();
    }
    if (t.theory == Theory::Third) {
        for (auto& [bd, v] : t.dims)
            os << "h_T^{(" << bd.first << "," << bd.second << ")+1} = " << v << "\n";
        return os.str();
    }
    // diamond rows: (0,0); (1,0),(0,1); (2,0),(1,1),(0,2); (2,1),(1,2); (2,2)
    const char* sym = theory_symbol(t.theory);
    auto cell = [&](int p, int q) {
        std::ostringstream c;
        c << sym << "^{" << p << "," << q << "}=" << t.dims.at({p, q});
        return c.str();
    };
    const int w = 14;
    auto pad = [&](const std::string& s) {
        int total = w - static_cast<int>(s.size());
        int l = std::max(0, total / 2), r = std::max(0, total - l);
        return std::string(l, ' ') + s + std::string(r, ' ');
    };
    std::string blank(w, ' ');
    os << blank << blank << pad(cell(0, 0)) << "\n";
    os << blank << pad(cell(1, 0)) << blank << pad(cell(0, 1)) << "\n";
    os << pad(cell(2, 0)) << blank << pad(cell(1, 1)) << blank << pad(cell(0, 2)) << "\n";
    os << blank << pad(cell(2, 1)) << blank << pad(cell(1, 2)) << "\n";
    os << blank << blank << pad(cell(2, 2)) << "\n";
    if (t.theory == Theory::Aeppli && t.hausdorff_completed)
        os << "note: Aeppli dimensions are Hausdorff-completed\n";
    return os.str();
}

std::string render_table_csv(const CohomologyTable& t) {
    std::ostringstream os;
    os << "theory,p,q,dim,hausdorff,N,K,M\n";
    for (auto& [bd, v] : t.dims) {
        os << to_string(t.theory) << "," << bd.first << "," << bd.second << "," << v << ","
           << (t.hausdorff_completed ? 1 : 0) << "," << t.truncation.N << "," << t.truncation.K << ","
           << t.truncation.M << "\n";
    }
    return os.str();
}

std::string render_table_json(const CohomologyTable& t) {
    json out;
    out["theory"] = to_string(t.theory);
    out["hausdorff_completed"] = t.hausdorff_completed;
    out["formal_only"] = t.formal_only;
    out["truncation"] = {{"N", t.truncation.N}, {"K", t.truncation.K}, {"M", t.truncation.M}};
    json dims = json::array();
    for (auto& [bd, v] : t.dims)
        dims.push_back({{"p", bd.first}, {"q", bd.second}, {"dim", v}});
    out["dims"] = dims;
    if (t.theory == Theory::DeRham) {
        json b = json::array();
        for (int k = 0; k <= 4; ++k) b.push_back(t.degree_dims.at(k));
        out["betti"] = b;
    }
    return out.dump(2) + "\n";
}

std::string render_certificate_text(const DiophantineCertificate& cert) {
    std::ostringstream os;
    os << "classification: " << to_string(cert.classification) << "\n";
    os << "method: "
       << (cert.method == DiophantineCertificate::Method::ContinuedFraction ? "ContinuedFraction"
                                                                            : "BruteForceScan")
       << "\n";
    if (cert.classification == ThetaClass::Theta)
        os << "C_est: " << format_double(cert.C_est) << "  delta_est: " << format_double(cert.delta_est)
           << "\n";
    os << "precision_bits: " << cert.precision_used << "\n";
    os << "diagnostic: " << cert.diagnostic << "\n";
    if (!cert.envelope_fits.empty()) {
        os << "fitted envelopes C(delta) = min dist/delta^n:\n";
        for (auto& [d, c] : cert.envelope_fits)
            os << "  delta=" << format_double(d) << "  C=" << format_double(c) << "\n";
    }
    return os.str();
}

std::string render_certificate_csv(const DiophantineCertificate& cert) {
    std::ostringstream os;
    os << "n,dist\n";
    for (auto& [n, d] : cert.samples) os << n << "," << format_double(d) << "\n";
    return os.str();
}

std::string render_certificate_json(const DiophantineCertificate& cert) {
    json out;
    out["classification"] = to_string(cert.classification);
    out["method"] = cert.method == DiophantineCertificate::Method::ContinuedFraction
                        ? "ContinuedFraction"
                        : "BruteForceScan";
    out["C_est"] = format_double(cert.C_est);
    out["delta_est"] = format_double(cert.delta_est);
    out["precision_bits"] = static_cast<long>(cert.precision_used);
    out["diagnostic"] = cert.diagnostic;
    json samples = json::array();
    for (auto& [n, d] : cert.samples) samples.push_back({{"n", n}, {"dist", format_double(d)}});
    out["samples"] = samples;
    json env = json::array();
    for (auto& [d, c] : cert.envelope_fits) env.push_back({{"delta", d}, {"C", c}});
    out["envelope_fits"] = env;
    return out.dump(2) + "\n";
}

std::string render_decay_csv(const std::vector<std::pair<int, double>>& profile,
                             const std::vector<double>& fitted_envelope) {
    std::ostringstream os;
    os << "n,min_abs_A" << (fitted_envelope.empty() ? "" : ",fitted_envelope") << "\n";
    for (size_t i = 0; i < profile.size(); ++i) {
        os << profile[i].first << "," << format_double(profile[i].second);
        if (!fitted_envelope.empty()) os << "," << format_double(fitted_envelope[i]);
        os << "\n";
    }
    return os.str();
}

}  // namespace tcohom
