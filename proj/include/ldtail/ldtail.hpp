#pragma once

#include "ldtail/asymptotics.hpp"
#include "ldtail/covariance.hpp"
#include "ldtail/error.hpp"
#include "ldtail/field.hpp"
#include "ldtail/functional.hpp"
#include "ldtail/grid.hpp"
#include "ldtail/mc.hpp"
#include "ldtail/optimizer.hpp"
#include "ldtail/pde.hpp"
#include "ldtail/random.hpp"
