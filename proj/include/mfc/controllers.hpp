#pragma once

#include "mfc/controllers/model_free.hpp"
#include "mfc/controllers/pid.hpp"
