#pragma once

// NFOP-CSV v1: a sampled radiating-structure operator as plain text.
//
//   #NFOP 1
//   #F <Hz>
//   #DIMS M P K
//   #GRID
//   r,theta,phi              K lines (m, rad, rad)
//   #S_RR                    M rows of M complex entries
//   #S_RF                    M rows of P
//   #S_NR                    6K rows of M
//   #S_NF                    6K rows of P
//
// Complex entries are written as "re,im" pairs; a row of C entries therefore
// holds 2C comma-separated numbers. Blocks with zero columns have no rows.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "nfrems/em_core.hpp"
#include "nfrems/error.hpp"
#include "nfrems/io/text.hpp"
#include "nfrems/multiport.hpp"

namespace nfrems::io {

inline constexpr double kIngestPassivityTol = 1e-9;
inline constexpr double kIngestReciprocityTol = 1e-9;

namespace detail {

inline void append_block(std::string& out, const char* tag, const CMat& m) {
  out += tag;
  out += '\n';
  if (m.cols() == 0) return;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ',';
      out += fmt_g17(m(r, c).real());
      out += ',';
      out += fmt_g17(m(r, c).imag());
    }
    out += '\n';
  }
}

class NfopReader {
 public:
  explicit NfopReader(std::string_view text) : lines_(lines_of(text)) {}

  std::string_view next(const char* expecting) {
    while (pos_ < lines_.size() && trim(lines_[pos_]).empty()) ++pos_;
    if (pos_ >= lines_.size()) throw Error(ErrorCode::ParseError, pos_ + 1, std::string("unexpected end of file, expecting ") + expecting);
    return trim(lines_[pos_++]);
  }

  [[nodiscard]] std::size_t line() const { return pos_; }

  /// Splits "#KEY rest" and checks the key.
  std::vector<std::string_view> header(const char* key) {
    const std::string_view l = next(key);
    const auto parts = split_ws(l);
    if (parts.empty() || parts[0] != key) {
      throw Error(ErrorCode::ParseError, line(), std::string("expected '") + key + "', got '" + std::string(l) + "'");
    }
    return {parts.begin() + 1, parts.end()};
  }

  CMat block(const char* tag, Eigen::Index rows, Eigen::Index cols) {
    header(tag);
    CMat m(rows, cols);
    if (cols == 0) return m;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const std::string_view l = next(tag);
      if (l.front() == '#') {
        throw Error(ErrorCode::DimensionMismatch, line(), std::string(tag) + " has " + std::to_string(r) +
                                                              " rows, header implies " + std::to_string(rows));
      }
      const auto fields = split(l, ',');
      if (static_cast<Eigen::Index>(fields.size()) != 2 * cols) {
        throw Error(ErrorCode::DimensionMismatch, line(), std::string(tag) + " row has " + std::to_string(fields.size()) +
                                                              " numbers, expected " + std::to_string(2 * cols));
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(r, c) = {parse_double(fields[static_cast<std::size_t>(2 * c)], line()),
                   parse_double(fields[static_cast<std::size_t>(2 * c + 1)], line())};
      }
    }
    return m;
  }

  bool peek_is_header() {
    while (pos_ < lines_.size() && trim(lines_[pos_]).empty()) ++pos_;
    return pos_ < lines_.size() && trim(lines_[pos_]).front() == '#';
  }

  bool at_end() {
    while (pos_ < lines_.size() && trim(lines_[pos_]).empty()) ++pos_;
    return pos_ >= lines_.size();
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string write_nfop(const RadiatingStructureOperator& op) {
  op.validate();
  std::string out = "#NFOP 1\n#F " + fmt_g17(op.f.hz()) + "\n#DIMS " + std::to_string(op.ports()) + ' ' +
                    std::to_string(op.excitations()) + ' ' + std::to_string(op.grid.size()) + "\n#GRID\n";
  for (const auto& p : op.grid.points) out += fmt_g17(p.r) + ',' + fmt_g17(p.theta) + ',' + fmt_g17(p.phi) + '\n';
  detail::append_block(out, "#S_RR", op.s_rr);
  detail::append_block(out, "#S_RF", op.s_rf);
  detail::append_block(out, "#S_NR", op.s_nr);
  detail::append_block(out, "#S_NF", op.s_nf);
  return out;
}

/// Parses an operator and reports (as warnings) failed passivity or
/// reciprocity of its port block.
inline RadiatingStructureOperator parse_nfop(std::string_view text) {
  detail::NfopReader rd(text);
  const auto ver = rd.header("#NFOP");
  if (ver.size() != 1 || ver[0] != "1") throw Error(ErrorCode::ParseError, rd.line(), "unsupported NFOP version");
  const auto fl = rd.header("#F");
  if (fl.size() != 1) throw Error(ErrorCode::ParseError, rd.line(), "#F takes one value");
  RadiatingStructureOperator op;
  try {
    op.f = FrequencySpec(parse_double(fl[0], rd.line()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ParseError, rd.line(), "frequency must be > 0");
  }
  const auto dims = rd.header("#DIMS");
  if (dims.size() != 3) throw Error(ErrorCode::ParseError, rd.line(), "#DIMS takes M P K");
  const long m = parse_long(dims[0], rd.line());
  const long p = parse_long(dims[1], rd.line());
  const long k = parse_long(dims[2], rd.line());
  if (m < 0 || p < 0 || k < 1) throw Error(ErrorCode::ParseError, rd.line(), "#DIMS needs M, P >= 0 and K >= 1");

  rd.header("#GRID");
  while (!rd.peek_is_header()) {
    const std::string_view l = rd.next("grid point");
    const auto f = split(l, ',');
    if (f.size() != 3) throw Error(ErrorCode::ParseError, rd.line(), "grid line needs r,theta,phi");
    const SphericalCoord pt{parse_double(f[0], rd.line()), parse_double(f[1], rd.line()), parse_double(f[2], rd.line())};
    if (!pt.valid()) throw Error(ErrorCode::ParseError, rd.line(), "grid point out of coordinate range");
    op.grid.points.push_back(pt);
  }
  if (static_cast<long>(op.grid.size()) != k) {
    throw Error(ErrorCode::DimensionMismatch, rd.line(), "#DIMS declares K = " + std::to_string(k) + " but the grid has " +
                                                             std::to_string(op.grid.size()) + " points");
  }
  op.s_rr = rd.block("#S_RR", m, m);
  op.s_rf = rd.block("#S_RF", m, p);
  op.s_nr = rd.block("#S_NR", 6 * k, m);
  op.s_nf = rd.block("#S_NF", 6 * k, p);
  if (!rd.at_end()) throw Error(ErrorCode::DimensionMismatch, rd.line() + 1, "trailing content after #S_NF");
  op.validate();

  const PassivityReport pr = check_passivity(op.s_rr, kIngestPassivityTol);
  if (!pr.passed) warn("ingested S_RR is not passive (max eig of S^H S = " + fmt_g17(pr.max_eigenvalue) + ")");
  const ReciprocityReport rr = check_reciprocity(op.s_rr, kIngestReciprocityTol);
  op.reciprocal = rr.passed;
  if (!rr.passed) warn("ingested S_RR is not reciprocal (relative asymmetry " + fmt_g17(rr.relative_asymmetry) + ")");
  return op;
}

inline RadiatingStructureOperator read_nfop(const std::string& path) { return parse_nfop(read_file(path)); }

inline void save_nfop(const RadiatingStructureOperator& op, const std::string& path) { write_file(path, write_nfop(op)); }

}  // namespace nfrems::io
