#pragma once

// Umbrella header for the linear Bernoulli factory library.

#include "linbf/basic.hpp"
#include "linbf/bounds.hpp"
#include "linbf/coin.hpp"
#include "linbf/errors.hpp"
#include "linbf/estimator.hpp"
#include "linbf/harness.hpp"
#include "linbf/linear_factory.hpp"
#include "linbf/random.hpp"
#include "linbf/stats.hpp"
