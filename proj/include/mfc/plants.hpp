#pragma once

#include "mfc/plants/buck.hpp"
#include "mfc/plants/lti.hpp"
#include "mfc/plants/noise.hpp"
#include "mfc/plants/schedule.hpp"
