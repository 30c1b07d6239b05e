#pragma once

#include "lgi/rng.hpp"

namespace lgi {

// Exact sampler for the Polya-Gamma PG(1, z) distribution, the augmentation
// variable behind every logistic conditional in the samplers. The draw is by
// alternating-series accept/reject on the Jacobi-theta representation, so no
// approximation enters the Gibbs kernel. PG(1, z) is symmetric in z.
//
// Tilts with |z| > 700 are clamped to 700; beyond that the distribution is
// numerically a point mass and the exponential terms underflow.
double draw_pg1(double z, Rng& rng);

// E[PG(1, z)] = tanh(z/2) / (2 z), with the z -> 0 limit 1/4.
double pg_mean(double z);

// Var[PG(1, z)] = (sinh(z) - z) * sech^2(z/2) / (4 z^3), limit 1/24 at z = 0.
double pg_var(double z);

}  // namespace lgi
