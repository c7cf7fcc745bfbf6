#pragma once

// Umbrella header.

#include "attracting_set.hpp"
#include "config.hpp"
#include "cover.hpp"
#include "criteria.hpp"
#include "decay_law.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "io.hpp"
#include "linear_modal.hpp"
#include "phase_space.hpp"
#include "sampling.hpp"
#include "semigroup.hpp"
#include "wave_system.hpp"
