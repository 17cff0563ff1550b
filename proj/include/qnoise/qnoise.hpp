#pragma once

#include "qnoise/config.hpp"
#include "qnoise/error.hpp"
#include "qnoise/format.hpp"
#include "qnoise/model.hpp"
#include "qnoise/noise.hpp"
#include "qnoise/potential.hpp"
#include "qnoise/propagator.hpp"
#include "qnoise/resonance.hpp"
#include "qnoise/scattering.hpp"
#include "qnoise/sweep.hpp"
#include "qnoise/tridiagonal.hpp"
#include "qnoise/wave_packet.hpp"
