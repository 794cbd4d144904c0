#pragma once

#include "swvi/types.hpp"

#include <filesystem>
#include <vector>

namespace swvi {

/// Componentwise axis-aligned box.
struct Box {
  Vector lower;
  Vector upper;

  Vector range() const { return upper - lower; }
  bool contains(const Vector& p, double tol = 0.0) const;
};

/// Per-column min and max over the rows of `samples`.
Box bounding_box(const SampleMatrix& samples);

/// lower + (upper - lower) * m0, row by row. m0 entries are expected in [0, 1].
SampleMatrix scale_to_box(const SampleMatrix& m0, const Box& box);

/// scale_to_box(m0, bounding_box(m_opt)).
SampleMatrix scale_prior(const SampleMatrix& m0, const SampleMatrix& m_opt);

struct PermutationOutput {
  SampleMatrix m_tilde;             // row i is the scaled prior paired with m_opt row i
  std::vector<Index> pairing;       // pairing[i] = prior row assigned to m_opt row i
};

/// Greedy nearest pairing: for i = 0..n-1 in order, m_opt row i takes the
/// Euclidean-nearest scaled prior row not yet used (lowest index on ties).
PermutationOutput permute(const SampleMatrix& m0, const SampleMatrix& m_opt);

/// Two columns: opt_index, prior_index.
void write_pairing_csv(const std::vector<Index>& pairing, const std::filesystem::path& path);

}  // namespace swvi
