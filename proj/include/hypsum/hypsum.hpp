#pragma once

#include "hypsum/errors.hpp"
#include "hypsum/signed_log.hpp"
#include "hypsum/specfun.hpp"
#include "hypsum/params.hpp"
#include "hypsum/coefficients.hpp"
#include "hypsum/extrapolation.hpp"
#include "hypsum/continuation.hpp"
#include "hypsum/asymptotics.hpp"
