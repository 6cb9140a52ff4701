// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header for the xlsim library.

#pragma once

#include "channel.hpp"
#include "config.hpp"
#include "frontend.hpp"
#include "geometry.hpp"
#include "harness.hpp"
#include "io.hpp"
#include "localization.hpp"
#include "metrics.hpp"
#include "recovery.hpp"
#include "rng.hpp"
#include "svg.hpp"
#include "types.hpp"

namespace xlsim {
inline constexpr const char *kVersion = "0.1.0";
}
