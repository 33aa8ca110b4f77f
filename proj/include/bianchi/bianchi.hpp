#pragma once

/// Umbrella header for the Bianchi I Einstein-scalar-field toolkit.

#include "bianchi/bounds.hpp"
#include "bianchi/conserved.hpp"
#include "bianchi/constraint.hpp"
#include "bianchi/core_types.hpp"
#include "bianchi/evolution.hpp"
#include "bianchi/io.hpp"
#include "bianchi/ode.hpp"
#include "bianchi/picard.hpp"
#include "bianchi/reconstruct.hpp"
#include "bianchi/riccati.hpp"
#include "bianchi/sampling.hpp"
#include "bianchi/trajectory.hpp"
