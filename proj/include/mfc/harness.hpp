#pragma once

#include "mfc/harness/reference.hpp"
#include "mfc/harness/run.hpp"
#include "mfc/harness/scenario.hpp"
#include "mfc/harness/validate.hpp"
