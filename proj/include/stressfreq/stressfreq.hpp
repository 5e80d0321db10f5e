#pragma once

#include "stressfreq/budget.hpp"
#include "stressfreq/categories.hpp"
#include "stressfreq/errors.hpp"
#include "stressfreq/estimator.hpp"
#include "stressfreq/events.hpp"
#include "stressfreq/io.hpp"
#include "stressfreq/simulator.hpp"
#include "stressfreq/synth.hpp"
#include "stressfreq/version.hpp"
