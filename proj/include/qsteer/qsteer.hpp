#pragma once

#include "qsteer/bloch.hpp"
#include "qsteer/boundaries.hpp"
#include "qsteer/channels.hpp"
#include "qsteer/errors.hpp"
#include "qsteer/random_states.hpp"
#include "qsteer/regions.hpp"
#include "qsteer/slice_io.hpp"
#include "qsteer/sphere_quadrature.hpp"
#include "qsteer/version.hpp"
