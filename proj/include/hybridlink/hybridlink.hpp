#pragma once

#include "hybridlink/channel.hpp"
#include "hybridlink/combining.hpp"
#include "hybridlink/errors.hpp"
#include "hybridlink/estimation.hpp"
#include "hybridlink/fec.hpp"
#include "hybridlink/noise.hpp"
#include "hybridlink/ofdm.hpp"
#include "hybridlink/scenario.hpp"
#include "hybridlink/signal.hpp"
#include "hybridlink/simulator.hpp"
#include "hybridlink/sync.hpp"
