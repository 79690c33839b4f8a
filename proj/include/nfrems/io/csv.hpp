#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "nfrems/error.hpp"
#include "nfrems/io/text.hpp"

namespace nfrems {

/// One evaluated sample: u^model(focusing solution) for both models and both
/// focusing solutions, already normalized. NaN marks a model not evaluated.
struct ResultRow {
  double r_m = 0.0;
  double theta_rad = 0.0;
  double phi_rad = 0.0;
  double f_hz = 0.0;
  double u_sw_swfocus = 0.0;
  double u_sw_pcfocus = 0.0;
  double u_pc_swfocus = 0.0;
  double u_pc_pcfocus = 0.0;
};

struct Denominators {
  double sw = 0.0;  // SW model under the PC solution at the normalization focus
  double pc = 0.0;  // PC model under the PC solution at the normalization focus
};

struct ResultSet {
  std::vector<ResultRow> rows;
  Denominators denominators;
  std::string config_hash;
  std::string version;
  std::vector<double> ascent_trace;  // RIS only
  bool ascent_converged = false;
  bool eigen_degenerate = false;
};

namespace io {

inline constexpr const char* kCsvHeader =
    "r_m,theta_rad,phi_rad,f_Hz,u_sw_swfocus,u_sw_pcfocus,u_pc_swfocus,u_pc_pcfocus";

inline std::string fmt_sci17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string format_csv(const ResultSet& rs) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const ResultRow& r : rs.rows) {
    const double cols[] = {r.r_m,          r.theta_rad,    r.phi_rad,      r.f_hz,
                           r.u_sw_swfocus, r.u_sw_pcfocus, r.u_pc_swfocus, r.u_pc_pcfocus};
    for (std::size_t i = 0; i < 8; ++i) {
      if (i > 0) out += ',';
      out += fmt_sci17(cols[i]);
    }
    out += '\n';
  }
  return out;
}

inline void emit_csv(const ResultSet& rs, const std::string& path) { write_file(path, format_csv(rs)); }

}  // namespace io
}  // namespace nfrems
