#pragma once

#include "hamforge/adiabatic.hpp"
#include "hamforge/circuit.hpp"
#include "hamforge/clock.hpp"
#include "hamforge/common.hpp"
#include "hamforge/gadget.hpp"
#include "hamforge/io.hpp"
#include "hamforge/pauli.hpp"
#include "hamforge/perturbation.hpp"
#include "hamforge/projection.hpp"
#include "hamforge/spectral.hpp"
