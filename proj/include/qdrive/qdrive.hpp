#pragma once

// Library umbrella header. The command-line layer lives in qdrive/cli.hpp and
// additionally needs the vendored CLI11 and nlohmann/json headers.

#include "qdrive/analysis.hpp"
#include "qdrive/core.hpp"
#include "qdrive/engine.hpp"
#include "qdrive/errors.hpp"
#include "qdrive/io.hpp"
#include "qdrive/lattice_map.hpp"
#include "qdrive/observables.hpp"
#include "qdrive/parallel.hpp"
#include "qdrive/plot.hpp"
#include "qdrive/protocols.hpp"
