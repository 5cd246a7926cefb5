#pragma once

#include "tcohom/cohomology.hpp"

#include <string>

namespace tcohom {

enum class OutputFormat { Text, Csv, Json };
std::optional<OutputFormat> format_from_string(const std::string& s);

// diamond layout mirroring the (p,q) arrangement of the dimension tables
std::string render_table_text(const CohomologyTable& t);
// theory,p,q,dim,hausdorff,N,K,M rows
std::string render_table_csv(const CohomologyTable& t);
std::string render_table_json(const CohomologyTable& t);

std::string render_certificate_text(const DiophantineCertificate& cert);
std::string render_certificate_csv(const DiophantineCertificate& cert);   // n,dist
std::string render_certificate_json(const DiophantineCertificate& cert);

std::string render_decay_csv(const std::vector<std::pair<int, double>>& profile,
                             const std::vector<double>& fitted_envelope);

}  // namespace tcohom
