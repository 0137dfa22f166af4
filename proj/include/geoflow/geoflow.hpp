#pragma once

// Umbrella header: flows of vector fields on compact manifolds, parallel
// transport on vector bundles, and the machinery tying the two together.

#include "geoflow/bundle.hpp"
#include "geoflow/correspondence.hpp"
#include "geoflow/errors.hpp"
#include "geoflow/experiments.hpp"
#include "geoflow/flows.hpp"
#include "geoflow/manifold.hpp"
#include "geoflow/random.hpp"
#include "geoflow/registry.hpp"
#include "geoflow/transport.hpp"
#include "geoflow/types.hpp"
