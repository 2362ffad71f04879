#pragma once

#include "ecra/frame_model.hpp"
#include "ecra/placement.hpp"
#include "ecra/interference.hpp"
#include "ecra/decoder.hpp"
#include "ecra/sic_engine.hpp"
#include "ecra/fixtures.hpp"
#include "ecra/harness.hpp"
#include "ecra/config.hpp"
#include "ecra/runner.hpp"
