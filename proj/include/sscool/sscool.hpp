#pragma once

#include "sscool/config.hpp"
#include "sscool/dynamics.hpp"
#include "sscool/error.hpp"
#include "sscool/model.hpp"
#include "sscool/operator.hpp"
#include "sscool/params.hpp"
#include "sscool/protocol.hpp"
#include "sscool/rates.hpp"
#include "sscool/rng.hpp"
#include "sscool/scenario.hpp"
