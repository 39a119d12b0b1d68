// dlab.hpp — Umbrella header for the dissipative-lattice toolkit

#pragma once

#include "dlab/error.hpp"
#include "dlab/units.hpp"
#include "dlab/parallel.hpp"
#include "dlab/lattice.hpp"
#include "dlab/spectral.hpp"
#include "dlab/spectroscopy.hpp"
#include "dlab/dynamics.hpp"
#include "dlab/montecarlo.hpp"
#include "dlab/io.hpp"
#include "dlab/config.hpp"
#include "dlab/commands.hpp"
