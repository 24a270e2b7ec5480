#pragma once

// Everything in one include.

#include "monopole/errors.hpp"
#include "monopole/su2.hpp"
#include "monopole/parallel.hpp"
#include "monopole/ode.hpp"
#include "monopole/quadrature.hpp"
#include "monopole/fields.hpp"
#include "monopole/bps.hpp"
#include "monopole/grid.hpp"
#include "monopole/minitwistor.hpp"
#include "monopole/rational_map.hpp"
#include "monopole/scattering.hpp"
#include "monopole/nahm.hpp"
#include "monopole/nahm_inverse.hpp"
#include "monopole/io.hpp"
