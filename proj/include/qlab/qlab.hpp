#pragma once

// Umbrella header for the wave-packet laboratory.

#include "qlab/constants.hpp"
#include "qlab/errors.hpp"
#include "qlab/grid.hpp"
#include "qlab/fft.hpp"
#include "qlab/field.hpp"
#include "qlab/packet.hpp"
#include "qlab/operators.hpp"
#include "qlab/noether.hpp"
#include "qlab/gauge.hpp"
#include "qlab/evolution.hpp"
#include "qlab/rng.hpp"
#include "qlab/stats.hpp"
#include "qlab/measurement.hpp"
#include "qlab/config.hpp"
#include "qlab/experiments.hpp"
