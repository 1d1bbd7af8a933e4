#include "subrad/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace subrad::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", x);
  return buf;
}

double round_sig12(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(format_double(x).c_str(), nullptr);
}

nlohmann::json complex_matrix_json(const CMatrix& m) {
  nlohmann::json pairs = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      pairs.push_back({round_sig12(m(i, j).real()), round_sig12(m(i, j).imag())});
    }
  }
  return pairs;
}

nlohmann::json to_json(const SectorHamiltonian& h) {
  return {{"n_atoms", h.basis.n_atoms()},
          {"k", h.basis.n_excitations()},
          {"rows", h.matrix.rows()},
          {"cols", h.matrix.cols()},
          {"matrix", complex_matrix_json(h.matrix)}};
}

nlohmann::json to_json(const HosvdResult& result) {
  nlohmann::json lambda = nlohmann::json::array();
  for (Eigen::Index a = 0; a < result.singular_values.size(); ++a) {
    lambda.push_back(round_sig12(result.singular_values(a)));
  }
  return {{"lambda", lambda}, {"entropy", round_sig12(result.entropy)}, {"U", complex_matrix_json(result.factor)}};
}

void write_decay_map_csv(std::ostream& os, const DecayMap& map) {
  os << "d_over_lambda,k,N,min_gamma\n";
  for (const auto& row : map.rows) {
    os << format_double(row.d_over_lambda) << ',' << row.k << ',' << row.n_atoms << ','
       << format_double(row.min_gamma) << '\n';
  }
}

void write_entropy_map_csv(std::ostream& os, const std::vector<EntropyMapRow>& rows) {
  os << "d_over_lambda,k,entropy\n";
  for (const auto& row : rows) {
    os << format_double(row.d_over_lambda) << ',' << row.k << ',' << format_double(row.entropy) << '\n';
  }
}

void write_correlation_csv(std::ostream& os, const CorrelationMatrix& corr) {
  os << "m,n,re,im\n";
  for (Eigen::Index m = 0; m < corr.values.rows(); ++m) {
    for (Eigen::Index n = 0; n < corr.values.cols(); ++n) {
      os << m + 1 << ',' << n + 1 << ',' << format_double(corr.values(m, n).real()) << ','
         << format_double(corr.values(m, n).imag()) << '\n';
    }
  }
}

void write_spectrum_csv(std::ostream& os, const ScatteringSpectrum& s) {
  os << "detuning,re_r,im_r,re_t,im_t,incoherent\n";
  for (std::size_t i = 0; i < s.detunings.size(); ++i) {
    os << format_double(s.detunings[i]) << ',' << format_double(s.r[i].real()) << ','
       << format_double(s.r[i].imag()) << ',' << format_double(s.t[i].real()) << ','
       << format_double(s.t[i].imag()) << ',' << format_double(s.incoherent[i]) << '\n';
  }
}

void write_linewidth_map_csv(std::ostream& os, const std::vector<LinewidthMapRow>& rows) {
  os << "power,d_over_lambda,narrowest_fwhm,found\n";
  for (const auto& row : rows) {
    os << format_double(row.power) << ',' << format_double(row.d_over_lambda) << ','
       << format_double(row.narrowest_fwhm.value_or(std::nan(""))) << ',' << (row.narrowest_fwhm ? 1 : 0) << '\n';
  }
}

nlohmann::json to_json(const DecayMap& map) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : map.rows) {
    out.push_back({{"d_over_lambda", round_sig12(row.d_over_lambda)},
                   {"k", row.k},
                   {"N", row.n_atoms},
                   {"min_gamma", round_sig12(row.min_gamma)}});
  }
  return out;
}

nlohmann::json to_json(const std::vector<EntropyMapRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    out.push_back({{"d_over_lambda", round_sig12(row.d_over_lambda)},
                   {"k", row.k},
                   {"entropy", round_sig12(row.entropy)}});
  }
  return out;
}

nlohmann::json to_json(const CorrelationMatrix& corr) {
  return {{"n_atoms", corr.n_atoms()}, {"values", complex_matrix_json(corr.values)}};
}

nlohmann::json to_json(const ScatteringSpectrum& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < s.detunings.size(); ++i) {
    rows.push_back({{"detuning", round_sig12(s.detunings[i])},
                    {"r", {round_sig12(s.r[i].real()), round_sig12(s.r[i].imag())}},
                    {"t", {round_sig12(s.t[i].real()), round_sig12(s.t[i].imag())}},
                    {"incoherent", round_sig12(s.incoherent[i])}});
  }
  nlohmann::json out = {{"points", rows}};
  out["narrowest_fwhm"] = s.narrowest_fwhm ? nlohmann::json(round_sig12(*s.narrowest_fwhm)) : nlohmann::json();
  return out;
}

nlohmann::json to_json(const std::vector<LinewidthMapRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    out.push_back({{"power", round_sig12(row.power)},
                   {"d_over_lambda", round_sig12(row.d_over_lambda)},
                   {"narrowest_fwhm",
                    row.narrowest_fwhm ? nlohmann::json(round_sig12(*row.narrowest_fwhm)) : nlohmann::json()},
                   {"found", row.narrowest_fwhm ? 1 : 0}});
  }
  return out;
}

}  // namespace subrad::io
