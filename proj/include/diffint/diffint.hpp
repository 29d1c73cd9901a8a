#pragma once

#include "diffint/error.hpp"
#include "diffint/core.hpp"
#include "diffint/schemes.hpp"
#include "diffint/golden_section.hpp"
#include "diffint/decoherence.hpp"
#include "diffint/mc_oracle.hpp"
#include "diffint/config.hpp"
#include "diffint/sweep.hpp"
#include "diffint/compare.hpp"
