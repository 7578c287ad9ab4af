// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stabilimeter/agreement.hpp"
#include "stabilimeter/bias.hpp"
#include "stabilimeter/core.hpp"
#include "stabilimeter/distribution.hpp"
#include "stabilimeter/error.hpp"
#include "stabilimeter/formula.hpp"
#include "stabilimeter/learners.hpp"
#include "stabilimeter/parallel.hpp"
#include "stabilimeter/random.hpp"
#include "stabilimeter/scenarios.hpp"
#include "stabilimeter/stability.hpp"
