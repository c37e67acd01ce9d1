#pragma once

// Umbrella header: online spectral hypergraph sparsification.

#include "hysparse/core.hpp"
#include "hysparse/generator.hpp"
#include "hysparse/io.hpp"
#include "hysparse/numeric.hpp"
#include "hysparse/reweighting.hpp"
#include "hysparse/ridged_laplacian.hpp"
#include "hysparse/rng.hpp"
#include "hysparse/sampler.hpp"
#include "hysparse/stored.hpp"
#include "hysparse/verify.hpp"

namespace hysparse {
inline constexpr const char* kVersion = "0.1.0";
}
