#pragma once

// Seeded random generators for states, channels and generators. All
// draws go through std::mt19937_64 so a fixed seed reproduces the same
// objects on a given platform.

#include <cstdint>
#include <random>

#include "dlab/channels.hpp"
#include "dlab/dynamics.hpp"

namespace dlab {

using Rng = std::mt19937_64;

CMatrix random_gaussian(int rows, int cols, Rng& rng);
CMatrix random_hermitian(int n, Rng& rng);
CMatrix random_density(int n, Rng& rng);
CMatrix random_unitary(int n, Rng& rng);

/// R Gaussian blocks stacked into an (R n) x n matrix, orthonormalized by
/// QR and split back, so the completeness relation holds to rounding.
KrausSet random_kraus(int n, int count, Rng& rng);
ChannelRep random_cptp(int n, Rng& rng);

LindbladGenerator random_lindblad(int n, int jumps, Rng& rng);

}  // namespace dlab
