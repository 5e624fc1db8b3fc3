#pragma once

#include "cogmpr/config_io.hpp"
#include "cogmpr/errors.hpp"
#include "cogmpr/experiment.hpp"
#include "cogmpr/phy.hpp"
#include "cogmpr/presets.hpp"
#include "cogmpr/queue_chain.hpp"
#include "cogmpr/rng.hpp"
#include "cogmpr/simulator.hpp"
#include "cogmpr/throughput.hpp"
