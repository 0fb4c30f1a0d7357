#ifndef OSOD_OSOD_HPP
#define OSOD_OSOD_HPP

// One-step one-decision unequal probability sampling.

#include "osod/baselines.hpp"
#include "osod/errors.hpp"
#include "osod/estimators.hpp"
#include "osod/oracle.hpp"
#include "osod/probability.hpp"
#include "osod/rng.hpp"
#include "osod/sampler.hpp"
#include "osod/stream.hpp"

#define OSOD_VERSION "0.3.0"

#endif  // OSOD_OSOD_HPP
