// Umbrella header
#pragma once

#include "analytics.hpp"
#include "benchmarking.hpp"
#include "clifford.hpp"
#include "config.hpp"
#include "fit.hpp"
#include "protocol.hpp"
#include "qubit.hpp"
#include "random.hpp"
#include "runner.hpp"
#include "telegraph.hpp"
