#pragma once

#include "gwlp/common.hpp"
#include "gwlp/design.hpp"
#include "gwlp/groups.hpp"
#include "gwlp/invariance.hpp"
#include "gwlp/spectra.hpp"
#include "gwlp/tensorlin.hpp"
