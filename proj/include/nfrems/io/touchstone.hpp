#pragma once

// Touchstone 1.x reader/writer, S-parameters only.
//
//   ! comment
//   # GHz S MA R 50
//   <f> <S11> <S21> <S12> <S22>          two ports (column-major quirk)
//   <f> <S11> <S12> ... wrapped rows      three or more ports (row-major)

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nfrems/em_core.hpp"
#include "nfrems/error.hpp"
#include "nfrems/io/text.hpp"

namespace nfrems::io {

enum class TouchstoneFormat { RI, MA, DB };

struct TouchstoneData {
  int ports = 0;
  double r0 = 50.0;
  std::vector<double> freq_hz;
  std::vector<CMat> s;

  /// S at exactly `f_hz` (relative tolerance `rel_tol`); no interpolation.
  [[nodiscard]] const CMat& at(double f_hz, double rel_tol = 1e-9) const {
    for (std::size_t i = 0; i < freq_hz.size(); ++i) {
      if (std::abs(freq_hz[i] - f_hz) <= rel_tol * f_hz) return s[i];
    }
    throw Error(ErrorCode::OutOfRange, "frequency " + fmt_g17(f_hz) + " Hz is not listed in the network data");
  }
};

/// Port count from a ".sNp" extension, or nullopt.
inline std::optional<int> touchstone_ports_from_name(const std::string& path) {
  std::string ext = upper(std::filesystem::path(path).extension().string());
  if (ext.size() < 4 || ext[1] != 'S' || ext.back() != 'P') return std::nullopt;
  const std::string digits = ext.substr(2, ext.size() - 3);
  if (digits.empty()) return std::nullopt;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  return std::stoi(digits);
}

namespace detail {

struct Token {
  std::string_view text;
  std::size_t line;
};

inline cplx to_rect(double a, double b, TouchstoneFormat fmt) {
  switch (fmt) {
    case TouchstoneFormat::RI: return {a, b};
    case TouchstoneFormat::MA: return std::polar(a, b * kPi / 180.0);
    case TouchstoneFormat::DB: return std::polar(std::pow(10.0, a / 20.0), b * kPi / 180.0);
  }
  return {};
}

}  // namespace detail

inline TouchstoneData parse_touchstone(std::string_view text, int ports) {
  if (ports < 1) throw Error(ErrorCode::InvalidParams, "Touchstone port count must be >= 1");
  TouchstoneData out;
  out.ports = ports;
  double unit = 1e9;
  TouchstoneFormat fmt = TouchstoneFormat::MA;
  bool seen_option = false;

  std::vector<detail::Token> tokens;
  std::vector<std::size_t> line_starts;  // token index where each data line begins
  const auto lines = lines_of(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t lineno = li + 1;
    std::string_view line = lines[li];
    const std::size_t bang = line.find('!');
    if (bang != std::string_view::npos) line = line.substr(0, bang);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (seen_option) continue;  // only the first option line counts
      seen_option = true;
      const auto opts = split_ws(line.substr(1));
      for (std::size_t i = 0; i < opts.size(); ++i) {
        const std::string t = upper(opts[i]);
        if (t == "HZ") unit = 1.0;
        else if (t == "KHZ") unit = 1e3;
        else if (t == "MHZ") unit = 1e6;
        else if (t == "GHZ") unit = 1e9;
        else if (t == "S") {}
        else if (t == "Y" || t == "Z" || t == "G" || t == "H") {
          throw Error(ErrorCode::UnsupportedParameterType, lineno, t + "-parameters are not supported");
        }
        else if (t == "RI") fmt = TouchstoneFormat::RI;
        else if (t == "MA") fmt = TouchstoneFormat::MA;
        else if (t == "DB") fmt = TouchstoneFormat::DB;
        else if (t == "R") {
          if (i + 1 >= opts.size()) throw Error(ErrorCode::ParseError, lineno, "option R needs a value");
          out.r0 = parse_double(opts[++i], lineno);
          if (!(out.r0 > 0.0)) throw Error(ErrorCode::ParseError, lineno, "reference impedance must be > 0");
        } else {
          throw Error(ErrorCode::ParseError, lineno, "unknown option '" + std::string(opts[i]) + "'");
        }
      }
      continue;
    }
    if (line.front() == '[') throw Error(ErrorCode::ParseError, lineno, "Touchstone 2 keywords are not supported");
    line_starts.push_back(tokens.size());
    for (auto t : split_ws(line)) tokens.push_back({t, lineno});
  }

  const std::size_t per_record = 1 + 2 * static_cast<std::size_t>(ports) * static_cast<std::size_t>(ports);
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    const std::size_t lineno = tokens[pos].line;
    const double f = parse_double(tokens[pos].text, lineno) * unit;
    if (!out.freq_hz.empty() && !(f > out.freq_hz.back())) {
      // Two-port files may append a noise block, which restarts the frequency axis.
      const bool line_start = std::find(line_starts.begin(), line_starts.end(), pos) != line_starts.end();
      if (ports == 2 && line_start && f <= out.freq_hz.back()) {
        std::size_t count = 0;
        while (pos + count < tokens.size() && tokens[pos + count].line == lineno) ++count;
        if (count == 5) break;
      }
      throw Error(ErrorCode::NonMonotonicFrequency, lineno, "frequencies must be strictly increasing");
    }
    if (pos + per_record > tokens.size()) {
      throw Error(ErrorCode::ParseError, tokens.back().line, "incomplete data record for " + fmt_g17(f) + " Hz");
    }
    CMat s(ports, ports);
    for (int e = 0; e < ports * ports; ++e) {
      const auto& ta = tokens[pos + 1 + 2 * static_cast<std::size_t>(e)];
      const auto& tb = tokens[pos + 2 + 2 * static_cast<std::size_t>(e)];
      const cplx v = detail::to_rect(parse_double(ta.text, ta.line), parse_double(tb.text, tb.line), fmt);
      if (ports == 2) s(e % 2, e / 2) = v;
      else s(e / ports, e % ports) = v;
    }
    out.freq_hz.push_back(f);
    out.s.push_back(std::move(s));
    pos += per_record;
  }
  if (out.freq_hz.empty()) throw Error(ErrorCode::ParseError, lines.size() + 1, "no network data found");
  return out;
}

inline TouchstoneData read_touchstone(const std::string& path, std::optional<int> ports = std::nullopt) {
  if (!ports) ports = touchstone_ports_from_name(path);
  if (!ports) throw Error(ErrorCode::InvalidParams, "cannot infer the port count of '" + path + "' (expected .sNp)");
  return parse_touchstone(read_file(path), *ports);
}

/// RI format in Hz with 17 significant digits, so parse(write(x)) == x bit for bit.
inline std::string write_touchstone(const TouchstoneData& d) {
  if (d.freq_hz.size() != d.s.size()) throw Error(ErrorCode::DimensionMismatch, "frequency and matrix counts differ");
  std::string out = "! written by nfrems\n# Hz S RI R " + fmt_g17(d.r0) + "\n";
  const int n = d.ports;
  for (std::size_t i = 0; i < d.freq_hz.size(); ++i) {
    const CMat& s = d.s[i];
    if (s.rows() != n || s.cols() != n) throw Error(ErrorCode::DimensionMismatch, "matrix size differs from port count");
    out += fmt_g17(d.freq_hz[i]);
    auto pair = [&](cplx v) { out += ' ' + fmt_g17(v.real()) + ' ' + fmt_g17(v.imag()); };
    if (n == 1) {
      pair(s(0, 0));
    } else if (n == 2) {
      pair(s(0, 0));
      pair(s(1, 0));
      pair(s(0, 1));
      pair(s(1, 1));
    } else {
      for (int r = 0; r < n; ++r) {
        if (r > 0) out += '\n';
        for (int c = 0; c < n; ++c) {
          if (c > 0 && c % 4 == 0) out += '\n';
          pair(s(r, c));
        }
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace nfrems::io
