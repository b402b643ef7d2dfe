#pragma once

#include "favar/common.hpp"
#include "favar/evaluate.hpp"
#include "favar/experiment.hpp"
#include "favar/factors.hpp"
#include "favar/forecast.hpp"
#include "favar/moments.hpp"
#include "favar/panel.hpp"
#include "favar/pipeline.hpp"
#include "favar/rng.hpp"
#include "favar/simulate.hpp"
#include "favar/trunc.hpp"
#include "favar/varlasso.hpp"
