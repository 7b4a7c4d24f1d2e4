#pragma once

#include "qvote/errors.hpp"
#include "qvote/qstate.hpp"
#include "qvote/ballots.hpp"
#include "qvote/protocol.hpp"
#include "qvote/attacks.hpp"
#include "qvote/montecarlo.hpp"
