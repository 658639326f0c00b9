#pragma once

#include "cvent/errors.hpp"
#include "cvent/linalg.hpp"
#include "cvent/rng.hpp"
#include "cvent/states.hpp"
#include "cvent/qstate_io.hpp"
#include "cvent/criteria.hpp"
#include "cvent/escalate.hpp"
