#pragma once

#include "qfc/errors.hpp"
#include "qfc/core.hpp"
#include "qfc/model.hpp"
#include "qfc/riskcost.hpp"
#include "qfc/policy.hpp"
#include "qfc/sim.hpp"
#include "qfc/dp.hpp"
#include "qfc/robustness.hpp"
#include "qfc/twostate.hpp"
