#pragma once

#include "nou/asymptotics.hpp"
#include "nou/coefficients.hpp"
#include "nou/hyper.hpp"
#include "nou/kernel.hpp"
#include "nou/linalg.hpp"
#include "nou/measures.hpp"
#include "nou/observable.hpp"
#include "nou/propagator.hpp"
#include "nou/quadrature.hpp"
#include "nou/sde.hpp"
#include "nou/spectral.hpp"
