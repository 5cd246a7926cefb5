#pragma once

#include "tcohom/form.hpp"

#include <string>

namespace tcohom {

// Form file: {"bidegree":[p,q],"entries":[{"sigma":[s1,s2,s3],"I":[..],"J":[..],
// "terms":[{"re":"..","im":"..","k":..,"m":..}]}]}. Canonical order: sigma lex,
// frame (I,J), then (k,m); numbers as decimal strings. Parse accepts
// non-normalized input (zero terms dropped, duplicates summed).
std::string serialize_form(const SpectralForm& f);
SpectralForm parse_form(const std::string& text, SpectralForm::LatticePtr lattice);

std::string serialize_lattice(const Lattice& lat);
// {"tau":{"re":REX,"im":REX},"p":REX,"q":REX}; REX one of {"rat":[n,d]},
// {"quad":[a_num,a_den,b_num,b_den,d]}, {"dec":"digits","prec":n},
// {"liouville":{"base":b,"exponents":"factorial"|[..],"trunc":k}}
Lattice parse_lattice(const std::string& text, mpfr_prec_t prec = 128);

std::string format_double(double v);  // deterministic shortest-roundtrip decimal string

}  // namespace tcohom
