#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "spikeseq/encode.hpp"
#include "spikeseq/matrix.hpp"

namespace spikeseq::transforms {

enum class TransformKind { rp, gaf, mtf };

struct TransformMatrix {
  TransformKind kind;
  Matrix values;
};

// Quantile-bin transition matrix: Q x Q row-stochastic probabilities plus the
// Q-1 upper bin edges they were built from.
struct MtfTransition {
  Matrix probabilities;
  std::vector<double> bin_edges;
};

// Unthresholded recurrence plot: entry (i,j) is the Euclidean distance
// between the delay trajectories (x_i, x_{i+tau}, ..., x_{i+(m-1)tau}) and
// (x_j, ...). Output is n' x n' with n' = n - (m-1)*tau.
TransformMatrix recurrence_plot(std::span<const double> x, std::size_t m = 1,
                                std::size_t tau = 1);

// Gramian angular field: min-max rescale into [a,b], phi = arccos, entry
// (i,j) = cos(phi_i + phi_j). A constant series rescales to the midpoint
// (a+b)/2 so arccos stays defined.
TransformMatrix gramian_angular_field(std::span<const double> x, double a = -1.0,
                                      double b = 1.0);

// Markov transition field over Q quantile bins: W counts consecutive-pair
// transitions between bins (rows normalized, unoccupied rows uniform); the
// field M has M(i,j) = W(bin(x_i), bin(x_j)).
std::pair<MtfTransition, TransformMatrix> markov_transition_field(std::span<const double> x,
                                                                  std::size_t q_bins = 8);

// Signal series as a real vector; pad zeros are kept as ordinary values
// unless slice_true_length is set.
std::vector<double> to_series(const encode::SignalSeries& signal,
                              bool slice_true_length = false);

void write_matrix_csv(const Matrix& m, std::ostream& out);

// Grayscale image (binary PGM), values min-max scaled to 0..255.
void write_matrix_pgm(const Matrix& m, std::ostream& out);

}  // namespace spikeseq::transforms
