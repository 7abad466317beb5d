// Unit-energy PSK / PAM / QAM alphabets and exhaustive enumeration of block symbol vectors.
#pragma once

#include "relayprec/linalg.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relayprec {

enum class ConstellationKind { PSK, PAM, QAM };

inline std::string to_string(ConstellationKind k) {
  switch (k) {
    case ConstellationKind::PSK: return "psk";
    case ConstellationKind::PAM: return "pam";
    case ConstellationKind::QAM: return "qam";
  }
  return "?";
}

/// Equiprobable M-ary alphabet normalized to unit average energy.
///
/// Point ordering (frozen, tests index into it):
///  - PSK: point m sits at angle 2πm/M + offset, offset = 0 for M = 2 and π/M otherwise,
///    so BPSK is {+1, -1} and QPSK is the diagonal set {e^{jπ/4}, e^{j3π/4}, ...}.
///  - PAM: ascending real levels -(M-1), ..., M-1, scaled.
///  - QAM: index m = i + √M·q with in-phase level i and quadrature level q, both ascending.
class Constellation {
 public:
  ConstellationKind kind() const { return kind_; }
  int order() const { return static_cast<int>(points_.size()); }
  const std::vector<cdouble>& points() const { return points_; }
  const cdouble& operator[](std::size_t m) const { return points_[m]; }
  double bits() const { return std::log2(static_cast<double>(points_.size())); }
  std::string name() const { return std::to_string(order()) + to_string(kind_); }

  static Constellation build(ConstellationKind kind, int m);

 private:
  Constellation(ConstellationKind kind, std::vector<cdouble> pts) : kind_(kind), points_(std::move(pts)) {}
  ConstellationKind kind_;
  std::vector<cdouble> points_;
};

namespace detail {

inline bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

inline std::vector<double> pam_levels(int m) {
  std::vector<double> lv(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) lv[static_cast<std::size_t>(i)] = 2.0 * i - (m - 1);
  return lv;
}

}  // namespace detail

inline Constellation Constellation::build(ConstellationKind kind, int m) {
  if (m < 2) throw std::invalid_argument("constellation order must be >= 2 (got " + std::to_string(m) + ")");
  if (!detail::is_power_of_two(m))
    throw std::invalid_argument("constellation order must be a power of 2 (got " + std::to_string(m) + ")");

  std::vector<cdouble> pts;
  pts.reserve(static_cast<std::size_t>(m));
  switch (kind) {
    case ConstellationKind::PSK: {
      const double offset = m == 2 ? 0.0 : std::numbers::pi / m;
      for (int i = 0; i < m; ++i) pts.push_back(std::polar(1.0, 2.0 * std::numbers::pi * i / m + offset));
      if (m == 2) pts = {cdouble(1.0, 0.0), cdouble(-1.0, 0.0)};
      break;
    }
    case ConstellationKind::PAM: {
      const double scale = std::sqrt(3.0 / (static_cast<double>(m) * m - 1.0));
      for (double l : detail::pam_levels(m)) pts.emplace_back(l * scale, 0.0);
      break;
    }
    case ConstellationKind::QAM: {
      const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
      if (side * side != m)
        throw std::invalid_argument("QAM order must be a perfect square (got " + std::to_string(m) + ")");
      const double scale = std::sqrt(1.5 / (m - 1.0));
      const auto lv = detail::pam_levels(side);
      for (int q = 0; q < side; ++q)
        for (int i = 0; i < side; ++i)
          pts.emplace_back(lv[static_cast<std::size_t>(i)] * scale, lv[static_cast<std::size_t>(q)] * scale);
      break;
    }
  }
  return Constellation(kind, std::move(pts));
}

inline Constellation build_constellation(ConstellationKind kind, int m) { return Constellation::build(kind, m); }

/// Parses "bpsk", "qpsk", "8psk", "4pam", "16qam", ... (case-insensitive).
inline Constellation parse_constellation(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "bpsk") return build_constellation(ConstellationKind::PSK, 2);
  if (s == "qpsk") return build_constellation(ConstellationKind::PSK, 4);
  std::size_t digits = 0;
  while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
  int m = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + digits, m);
  const std::string suffix = s.substr(digits);
  if (digits == 0 || ec != std::errc() || ptr != s.data() + digits)
    throw std::invalid_argument("unknown constellation '" + std::string(text) + "' (expected e.g. bpsk, qpsk, 16qam, 4pam)");
  if (suffix == "psk") return build_constellation(ConstellationKind::PSK, m);
  if (suffix == "pam") return build_constellation(ConstellationKind::PAM, m);
  if (suffix == "qam") return build_constellation(ConstellationKind::QAM, m);
  throw std::invalid_argument("unknown constellation family '" + suffix + "' in '" + std::string(text) + "'");
}

inline constexpr std::size_t kMaxSymbolVectors = std::size_t{1} << 20;

/// All M^{2L} block vectors as the columns of a 2L × M^{2L} matrix.
///
/// Column j holds digit c of j in base M (little-endian: coordinate 0 varies fastest) as the
/// constellation index of coordinate c.
class SymbolSpace {
 public:
  SymbolSpace(const Constellation& c, int block_length) : constellation_(c), block_length_(block_length) {
    if (block_length < 1) throw std::invalid_argument("block length L must be >= 1");
    const auto m = static_cast<std::size_t>(c.order());
    const int dim = 2 * block_length;
    std::size_t count = 1;
    for (int i = 0; i < dim; ++i) {
      if (count > kMaxSymbolVectors / m)
        throw capacity_error("symbol space M^{2L} = " + std::to_string(m) + "^" + std::to_string(dim) +
                             " exceeds the 2^20 enumeration guard");
      count *= m;
    }
    vectors_.resize(dim, static_cast<Eigen::Index>(count));
    for (std::size_t j = 0; j < count; ++j) {
      std::size_t rem = j;
      for (int i = 0; i < dim; ++i) {
        vectors_(i, static_cast<Eigen::Index>(j)) = c[rem % m];
        rem /= m;
      }
    }
  }

  const Constellation& constellation() const { return constellation_; }
  int block_length() const { return block_length_; }
  int dim() const { return 2 * block_length_; }
  std::size_t size() const { return static_cast<std::size_t>(vectors_.cols()); }
  /// 2L × M^{2L}.
  const CMatrix& vectors() const { return vectors_; }
  auto vector(std::size_t j) const { return vectors_.col(static_cast<Eigen::Index>(j)); }

 private:
  Constellation constellation_;
  int block_length_;
  CMatrix vectors_;
};

inline SymbolSpace enumerate_vectors(const Constellation& c, int block_length) { return SymbolSpace(c, block_length); }

}  // namespace relayprec
