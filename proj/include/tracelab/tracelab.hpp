#pragma once

#include "tracelab/chebyshev.hpp"
#include "tracelab/common.hpp"
#include "tracelab/divergence.hpp"
#include "tracelab/estimators.hpp"
#include "tracelab/hodlr.hpp"
#include "tracelab/index_set.hpp"
#include "tracelab/lanczos.hpp"
#include "tracelab/linop.hpp"
#include "tracelab/parallel.hpp"
#include "tracelab/probes.hpp"
#include "tracelab/rng.hpp"
#include "tracelab/spectral_function.hpp"
#include "tracelab/wishart.hpp"
