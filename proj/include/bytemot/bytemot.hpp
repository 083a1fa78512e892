#pragma once

#include "bytemot/assignment.hpp"
#include "bytemot/association.hpp"
#include "bytemot/config.hpp"
#include "bytemot/experiments.hpp"
#include "bytemot/geometry.hpp"
#include "bytemot/io.hpp"
#include "bytemot/metrics.hpp"
#include "bytemot/motion.hpp"
#include "bytemot/simharness.hpp"
#include "bytemot/tracker.hpp"
