#pragma once

// Convenience include for the whole library.

#include "nicons/analysis.hpp"
#include "nicons/common.hpp"
#include "nicons/dynamics.hpp"
#include "nicons/network.hpp"
#include "nicons/ni_models.hpp"
#include "nicons/runner.hpp"
#include "nicons/scenario.hpp"
#include "nicons/serialize.hpp"
#include "nicons/topology.hpp"
