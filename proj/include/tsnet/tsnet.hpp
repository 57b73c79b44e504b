#pragma once

// Umbrella header.

#include "tsnet/backlund.hpp"
#include "tsnet/error.hpp"
#include "tsnet/json_io.hpp"
#include "tsnet/lax_pair.hpp"
#include "tsnet/mesh_io.hpp"
#include "tsnet/pipeline.hpp"
#include "tsnet/quaternion.hpp"
#include "tsnet/surface.hpp"
#include "tsnet/timescale.hpp"
