#include "tcohom/form_io.hpp"

#include "json.hpp"

#include <cstdio>
#include <cstring>

namespace tcohom {

using nlohmann::json;

std::string format_double(double v) {
    if (v == 0.0) return "0";  // normalize -0
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec <= 16; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

namespace {

std::vector<int> mask_to_indices(uint8_t mask) {
    std::vector<int> v;
    for (int i = 0; i < 2; ++i)
        if (mask & (1 << i)) v.push_back(i + 1);
    return v;
}

uint8_t indices_to_mask(const json& arr, const char* what) {
    uint8_t m = 0;
    for (auto& e : arr) {
        int i = e.get<int>();
        if (i < 1 || i > 2) throw ParseError(std::string("form file: ") + what + " index out of {1,2}");
        m |= 1 << (i - 1);
    }
    return m;
}

double parse_decimal(const json& v, const char* field) {
    if (v.is_string()) {
        const std::string& s = v.get_ref<const std::string&>();
        char* end = nullptr;
        double d = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || (end && *end != '\0')) throw ParseError(std::string("form file: bad decimal string in ") + field);
        return d;
    }
    if (v.is_number()) return v.get<double>();
    throw ParseError(std::string("form file: field ") + field + " must be a decimal string");
}

RealExpr parse_realexpr(const json& v, const char* field) {
    if (!v.is_object()) throw ParseError(std::string("lattice file: ") + field + " must be an object");
    if (v.contains("rat")) {
        auto& a = v["rat"];
        if (!a.is_array() || a.size() != 2) throw ParseError("lattice file: rat wants [num, den]");
        return RealExpr::rational(a[0].get<long long>(), a[1].get<long long>());
    }
    if (v.contains("quad")) {
        auto& a = v["quad"];
        if (!a.is_array() || a.size() != 5) throw ParseError("lattice file: quad wants [a_num,a_den,b_num,b_den,d]");
        return RealExpr::quadratic(a[0].get<long long>(), a[1].get<long long>(), a[2].get<long long>(),
                                   a[3].get<long long>(), a[4].get<long long>());
    }
    if (v.contains("dec")) {
        unsigned prec = v.contains("prec") ? v["prec"].get<unsigned>() : 15u;
        return RealExpr::decimal(v["dec"].get<std::string>(), prec);
    }
    if (v.contains("liouville")) {
        auto& l = v["liouville"];
        long long base = l.value("base", 10ll);
        unsigned trunc = l.value("trunc", 6u);
        if (l.contains("exponents") && l["exponents"].is_array()) {
            RealExpr::LiouvilleSeries ls;
            ls.base = base;
            ls.factorial = false;
            ls.truncation = trunc;
            for (auto& e : l["exponents"]) ls.exponents.push_back(e.get<long long>());
            if (ls.truncation > ls.exponents.size()) ls.truncation = static_cast<unsigned>(ls.exponents.size());
            return RealExpr(ls);
        }
        return RealExpr::liouville_factorial(base, trunc);
    }
    throw ParseError(std::string("lattice file: unknown real-expr variant in ") + field);
}

json realexpr_to_json(const RealExpr& e) {
    json v;
    if (auto* r = e.as_rational()) {
        v["rat"] = {r->num, r->den};
    } else if (auto* q = e.as_quadratic()) {
        v["quad"] = {q->a_num, q->a_den, q->b_num, q->b_den, q->d};
    } else if (auto* d = e.as_decimal()) {
        v["dec"] = d->digits;
        v["prec"] = d->precision;
    } else if (auto* l = e.as_liouville()) {
        json lj;
        lj["base"] = l->base;
        lj["trunc"] = l->truncation;
        if (l->factorial)
            lj["exponents"] = "factorial";
        else
            lj["exponents"] = l->exponents;
        v["liouville"] = lj;
    }
    return v;
}

}  // namespace

std::string serialize_form(const SpectralForm& f) {
    json out;
    out["bidegree"] = {f.p(), f.q()};
    json entries = json::array();
    // entries() iterates (sigma lex, frame) sorted; terms sorted by (k,m)
    for (auto& [key, c] : f.entries()) {
        json e;
        e["sigma"] = {key.first.s1, key.first.s2, key.first.s3};
        e["I"] = mask_to_indices(key.second.I);
        e["J"] = mask_to_indices(key.second.J);
        json terms = json::array();
        for (auto& [km, v] : c.terms()) {
            json t;
            t["re"] = format_double(v.real());
            t["im"] = format_double(v.imag());
            t["k"] = km.first;
            t["m"] = km.second;
            terms.push_back(t);
        }
        e["terms"] = terms;
        entries.push_back(e);
    }
    out["entries"] = entries;
    return out.dump(2) + "\n";
}

SpectralForm parse_form(const std::string& text, SpectralForm::LatticePtr lattice) {
    json in;
    try {
        in = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("form file: ") + e.what());
    }
    if (!in.contains("bidegree") || !in["bidegree"].is_array() || in["bidegree"].size() != 2)
        throw ParseError("form file: missing bidegree [p,q]");
    int p = in["bidegree"][0].get<int>();
    int q = in["bidegree"][1].get<int>();
    SpectralForm f(p, q, std::move(lattice));
    if (!in.contains("entries")) return f;
    size_t idx = 0;
    for (auto& e : in["entries"]) {
        ++idx;
        auto where = [&] { return "form file: entry " + std::to_string(idx); };
        if (!e.contains("sigma") || e["sigma"].size() != 3) throw ParseError(where() + ": sigma wants [s1,s2,s3]");
        ModeIndex s{e["sigma"][0].get<int>(), e["sigma"][1].get<int>(), e["sigma"][2].get<int>()};
        Frame fr{indices_to_mask(e.value("I", json::array()), "I"),
                 indices_to_mask(e.value("J", json::array()), "J")};
        if (fr.p() != p || fr.q() != q) throw ParseError(where() + ": frame does not match bidegree");
        CoeffFunction c;
        for (auto& t : e.value("terms", json::array())) {
            double re = parse_decimal(t.value("re", json("0")), "re");
            double im = parse_decimal(t.value("im", json("0")), "im");
            int k = t.value("k", 0);
            int m = t.value("m", 0);
            if (k < 0) throw ParseError(where() + ": negative k");
            c.add_term(k, m, Complex(re, im));  // zero terms drop in normalization
        }
        if (!c.is_zero()) f.add_entry(s, fr, c);
    }
    return f;
}

std::string serialize_lattice(const Lattice& lat) {
    json out;
    out["tau"] = {{"re", realexpr_to_json(lat.tau_re_expr())}, {"im", realexpr_to_json(lat.tau_im_expr())}};
    out["p"] = realexpr_to_json(lat.p_expr());
    out["q"] = realexpr_to_json(lat.q_expr());
    return out.dump(2) + "\n";
}

Lattice parse_lattice(const std::string& text, mpfr_prec_t prec) {
    json in;
    try {
        in = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("lattice file: ") + e.what());
    }
    if (!in.contains("tau") || !in["tau"].is_object()) throw ParseError("lattice file: missing tau {re, im}");
    RealExpr tre = parse_realexpr(in["tau"]["re"], "tau.re");
    RealExpr tim = parse_realexpr(in["tau"]["im"], "tau.im");
    if (!in.contains("p") || !in.contains("q")) throw ParseError("lattice file: missing p or q");
    RealExpr p = parse_realexpr(in["p"], "p");
    RealExpr q = parse_realexpr(in["q"], "q");
    return Lattice(std::move(tre), std::move(tim), std::move(p), std::move(q), prec);
}

}  // namespace tcohom
