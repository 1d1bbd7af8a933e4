#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "subrad/driven.hpp"
#include "subrad/lattice.hpp"
#include "subrad/observables.hpp"
#include "subrad/spectrum.hpp"
#include "subrad/tensor.hpp"

namespace subrad::io {

// 12 significant digits, lowercase scientific ("1.32372072960e-04").
std::string format_double(double x);
// The value format_double prints, parsed back. Keeps JSON output in step
// with CSV output.
double round_sig12(double x);

nlohmann::json to_json(const SectorHamiltonian& h);
nlohmann::json to_json(const HosvdResult& result);
nlohmann::json complex_matrix_json(const CMatrix& m);  // row-major [re, im] pairs

struct EntropyMapRow {
  double d_over_lambda = 0.0;
  int k = 0;
  double entropy = 0.0;
};

struct LinewidthMapRow {
  double power = 0.0;
  double d_over_lambda = 0.0;
  std::optional<double> narrowest_fwhm;
};

void write_decay_map_csv(std::ostream& os, const DecayMap& map);
void write_entropy_map_csv(std::ostream& os, const std::vector<EntropyMapRow>& rows);
// Sites are written 1-based.
void write_correlation_csv(std::ostream& os, const CorrelationMatrix& corr);
void write_spectrum_csv(std::ostream& os, const ScatteringSpectrum& spectrum);
void write_linewidth_map_csv(std::ostream& os, const std::vector<LinewidthMapRow>& rows);

nlohmann::json to_json(const DecayMap& map);
nlohmann::json to_json(const std::vector<EntropyMapRow>& rows);
nlohmann::json to_json(const CorrelationMatrix& corr);
nlohmann::json to_json(const ScatteringSpectrum& spectrum);
nlohmann::json to_json(const std::vector<LinewidthMapRow>& rows);

}  // namespace subrad::io
