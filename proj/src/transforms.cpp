#include "spikeseq/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace spikeseq::transforms {

TransformMatrix recurrence_plot(std::span<const double> x, std::size_t m, std::size_t tau) {
  if (m < 1) throw std::invalid_argument("embedding dimension m must be >= 1");
  if (tau < 1) throw std::invalid_argument("time delay tau must be >= 1");
  const std::size_t span = (m - 1) * tau;
  if (x.size() < span + 2)
    throw std::invalid_argument("series of length " + std::to_string(x.size()) +
                                " too short for (m=" + std::to_string(m) +
                                ", tau=" + std::to_string(tau) + "): need at least " +
                                std::to_string(span + 2));
  const std::size_t n = x.size() - span;

  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double diff = x[i + k * tau] - x[j + k * tau];
        sq += diff * diff;
      }
      const double dist = std::sqrt(sq);
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return {TransformKind::rp, std::move(d)};
}

TransformMatrix gramian_angular_field(std::span<const double> x, double a, double b) {
  if (x.empty()) throw std::invalid_argument("GAF needs a non-empty series");
  if (!(a >= -1.0 && a < b && b <= 1.0))
    throw std::invalid_argument("GAF bounds must satisfy -1 <= a < b <= 1");

  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it, hi = *hi_it;

  const std::size_t n = x.size();
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    double scaled = (hi == lo) ? 0.5 * (a + b) : a + (b - a) * (x[i] - lo) / (hi - lo);
    scaled = std::clamp(scaled, -1.0, 1.0);
    phi[i] = std::acos(scaled);
  }

  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = std::cos(phi[i] + phi[j]);
      g(i, j) = v;
      g(j, i) = v;
    }
  return {TransformKind::gaf, std::move(g)};
}

std::pair<MtfTransition, TransformMatrix> markov_transition_field(std::span<const double> x,
                                                                  std::size_t q_bins) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("MTF needs a series of length >= 2");
  if (q_bins < 2 || q_bins > n)
    throw std::invalid_argument("MTF bin count must satisfy 2 <= Q <= n");

  // Upper bin edges: empirical quantiles at k/Q, inverted-CDF convention
  // (rank ceil(n*k/Q), 1-based).
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges(q_bins - 1);
  for (std::size_t k = 1; k < q_bins; ++k)
    edges[k - 1] = sorted[(n * k + q_bins - 1) / q_bins - 1];

  // Lowest bin whose upper edge covers the value; the top bin is unbounded.
  auto bin_of = [&](double v) {
    for (std::size_t b = 0; b + 1 < q_bins; ++b)
      if (edges[b] >= v) return b;
    return q_bins - 1;
  };
  std::vector<std::size_t> bins(n);
  for (std::size_t t = 0; t < n; ++t) bins[t] = bin_of(x[t]);

  Matrix w(q_bins, q_bins);
  for (std::size_t t = 0; t + 1 < n; ++t) w(bins[t], bins[t + 1]) += 1.0;
  for (std::size_t i = 0; i < q_bins; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < q_bins; ++j) row += w(i, j);
    if (row == 0.0) {
      for (std::size_t j = 0; j < q_bins; ++j) w(i, j) = 1.0 / static_cast<double>(q_bins);
    } else {
      for (std::size_t j = 0; j < q_bins; ++j) w(i, j) /= row;
    }
  }

  Matrix field(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) field(i, j) = w(bins[i], bins[j]);

  return {MtfTransition{std::move(w), std::move(edges)},
          TransformMatrix{TransformKind::mtf, std::move(field)}};
}

std::vector<double> to_series(const encode::SignalSeries& signal, bool slice_true_length) {
  const std::size_t n = slice_true_length ? signal.true_length : signal.values.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(signal.values[i]);
  return out;
}

void write_matrix_csv(const Matrix& m, std::ostream& out) {
  char buf[32];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

void write_matrix_pgm(const Matrix& m, std::ostream& out) {
  const auto& v = m.data();
  if (v.empty()) throw std::invalid_argument("cannot write an empty matrix as an image");
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it, hi = *hi_it;
  out << "P5\n" << m.cols() << ' ' << m.rows() << "\n255\n";
  for (double d : v) {
    const double scaled = (hi == lo) ? 0.0 : 255.0 * (d - lo) / (hi - lo);
    out.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(scaled))));
  }
}

}  // namespace spikeseq::transforms
