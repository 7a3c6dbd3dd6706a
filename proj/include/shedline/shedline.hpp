#pragma once

#include "shedline/clock.hpp"
#include "shedline/config.hpp"
#include "shedline/evaluators.hpp"
#include "shedline/load_monitor.hpp"
#include "shedline/metrics.hpp"
#include "shedline/shedding_engine.hpp"
#include "shedline/trust_cache.hpp"
#include "shedline/types.hpp"
#include "shedline/url.hpp"
#include "shedline/workload.hpp"
