#pragma once

#include "mrq/cdf_analysis.hpp"
#include "mrq/quantizers.hpp"
#include "mrq/relay_sim.hpp"
#include "mrq/tradeoff.hpp"
