#pragma once

// Umbrella header for the device performance perception toolkit.

#include "perfsense/abharness.hpp"
#include "perfsense/config.hpp"
#include "perfsense/csv.hpp"
#include "perfsense/engine.hpp"
#include "perfsense/evaluate.hpp"
#include "perfsense/forecast.hpp"
#include "perfsense/portrait.hpp"
#include "perfsense/preprocess.hpp"
#include "perfsense/schema.hpp"
#include "perfsense/smooth.hpp"
