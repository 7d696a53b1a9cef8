#pragma once

#include "spinrb/analysis.hpp"
#include "spinrb/clifford.hpp"
#include "spinrb/errors.hpp"
#include "spinrb/gates.hpp"
#include "spinrb/io.hpp"
#include "spinrb/linalg.hpp"
#include "spinrb/noise.hpp"
#include "spinrb/presets.hpp"
#include "spinrb/pulse.hpp"
#include "spinrb/rb.hpp"
#include "spinrb/rng.hpp"
#include "spinrb/state.hpp"
#include "spinrb/sweep.hpp"

//! spinrb: a single-qubit randomized-benchmarking laboratory
namespace spinrb {}
