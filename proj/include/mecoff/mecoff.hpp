#pragma once

#include "mecoff/channel.hpp"
#include "mecoff/dp.hpp"
#include "mecoff/errors.hpp"
#include "mecoff/model.hpp"
#include "mecoff/optimizer.hpp"
#include "mecoff/rng.hpp"
#include "mecoff/sim.hpp"
