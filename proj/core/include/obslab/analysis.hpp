#pragma once

#include "obslab/blowup.hpp"
#include "obslab/frequency.hpp"
#include "obslab/monotonicity.hpp"
