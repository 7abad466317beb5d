// Text formats: "a+bj" complex literals, key = value experiment configs, and the
// "rows cols" precoder matrix file.
#pragma once

#include "relayprec/channel.hpp"
#include "relayprec/linalg.hpp"
#include "relayprec/objective.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relayprec {

/// Raised for malformed text input; the message names the line and field.
class parse_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace detail

/// Accepts "0.4", "-0.9j", "1.2+0.3j", "1e-3-2j", "j", "-j" (also with 'i').
inline cdouble parse_complex(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  auto fail = [&] { return parse_error("invalid complex number '" + std::string(text) + "' (expected a+bj)"); };
  if (s.empty()) throw fail();
  const char last = static_cast<char>(std::tolower(static_cast<unsigned char>(s.back())));
  if (last != 'j' && last != 'i') {
    double re = 0;
    if (!detail::parse_double(s, re)) throw fail();
    return {re, 0.0};
  }
  s.pop_back();
  // Split at the last sign that is not a leading sign or an exponent sign.
  std::size_t split = std::string::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && std::tolower(static_cast<unsigned char>(s[i - 1])) != 'e') {
      split = i;
      break;
    }
  }
  auto imag_of = [&](std::string_view t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    double v = 0;
    if (!detail::parse_double(t, v)) throw fail();
    return v;
  };
  if (split == std::string::npos) return {0.0, imag_of(s)};
  double re = 0;
  if (!detail::parse_double(std::string_view(s).substr(0, split), re)) throw fail();
  return {re, imag_of(std::string_view(s).substr(split))};
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_complex(cdouble z) {
  std::string s = format_double(z.real());
  const double im = z.imag();
  s += (std::signbit(im) ? "-" : "+") + format_double(std::abs(im)) + "j";
  return s;
}

/// Complex matrix text format: header "rows cols", then one line per row holding `cols`
/// whitespace-separated "re im" pairs.
inline void write_matrix(std::ostream& os, const CMatrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(m(i, j).real()) << ' ' << format_double(m(i, j).imag());
    }
    os << '\n';
  }
}

inline CMatrix read_matrix(std::istream& is) {
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++lineno;
      if (!detail::trim(line).empty()) return true;
    }
    return false;
  };
  auto numbers = [&](const std::string& l) {
    std::istringstream ss(l);
    std::vector<double> v;
    std::string tok;
    while (ss >> tok) {
      double x = 0;
      if (!detail::parse_double(tok, x))
        throw parse_error("line " + std::to_string(lineno) + ": '" + tok + "' is not a number");
      v.push_back(x);
    }
    return v;
  };
  if (!next_line()) throw parse_error("line 1: missing 'rows cols' header");
  const auto hdr = numbers(line);
  if (hdr.size() != 2 || hdr[0] < 1 || hdr[1] < 1 || hdr[0] != std::floor(hdr[0]) || hdr[1] != std::floor(hdr[1]))
    throw parse_error("line " + std::to_string(lineno) + ": header must be two positive integers 'rows cols'");
  const auto rows = static_cast<Eigen::Index>(hdr[0]);
  const auto cols = static_cast<Eigen::Index>(hdr[1]);
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!next_line())
      throw parse_error("line " + std::to_string(lineno + 1) + ": expected " + std::to_string(rows) +
                        " matrix rows, file ended after " + std::to_string(i));
    const auto v = numbers(line);
    if (static_cast<Eigen::Index>(v.size()) != 2 * cols)
      throw parse_error("line " + std::to_string(lineno) + ": expected " + std::to_string(2 * cols) +
                        " numbers (re im pairs), got " + std::to_string(v.size()));
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cdouble(v[2 * j], v[2 * j + 1]);
  }
  if (next_line()) throw parse_error("line " + std::to_string(lineno) + ": unexpected trailing data");
  return m;
}

inline CMatrix read_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return read_matrix(f);
  } catch (const parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
}

inline void write_matrix_file(const std::string& path, const CMatrix& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  write_matrix(f, m);
}

}  // namespace relayprec
