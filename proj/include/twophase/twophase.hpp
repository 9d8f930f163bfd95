#pragma once

// Numerical modules (Eigen and Boost headers only). The configuration and artifact layer
// (config.hpp, io.hpp, runner.hpp, suite.hpp) additionally needs yaml-cpp and OpenSSL.

#include "twophase/error.hpp"
#include "twophase/constitutive.hpp"
#include "twophase/thermo.hpp"
#include "twophase/geometry.hpp"
#include "twophase/equilibria.hpp"
#include "twophase/harmonics.hpp"
#include "twophase/variations.hpp"
#include "twophase/chebyshev.hpp"
#include "twophase/spectral.hpp"
#include "twophase/pencil.hpp"
#include "twophase/radial.hpp"
#include "twophase/ripening.hpp"
#include "twophase/residuals.hpp"
