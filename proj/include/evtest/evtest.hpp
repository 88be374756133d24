#pragma once

#include "evtest/betting.hpp"
#include "evtest/combine.hpp"
#include "evtest/eprocess.hpp"
#include "evtest/error.hpp"
#include "evtest/evidence.hpp"
#include "evtest/experiment.hpp"
#include "evtest/format.hpp"
#include "evtest/generators.hpp"
#include "evtest/golden.hpp"
#include "evtest/monitor.hpp"
#include "evtest/random.hpp"
