#pragma once

// Umbrella header.

#include "blsac/filter.hpp"
#include "blsac/fixedpoint.hpp"
#include "blsac/fourier.hpp"
#include "blsac/gaussconv.hpp"
#include "blsac/instances.hpp"
#include "blsac/mdp.hpp"
#include "blsac/noise.hpp"
#include "blsac/numerics.hpp"
#include "blsac/policy.hpp"
#include "blsac/rng.hpp"
#include "blsac/soft_dynamics.hpp"
#include "blsac/softpi.hpp"
#include "blsac/version.hpp"
