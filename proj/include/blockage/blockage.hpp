#pragma once

// Everything except the command-line layer (blockage/cli.hpp).

#include "blockage/applications.hpp"
#include "blockage/conditional.hpp"
#include "blockage/config.hpp"
#include "blockage/distribution.hpp"
#include "blockage/errors.hpp"
#include "blockage/geometry.hpp"
#include "blockage/renewal.hpp"
#include "blockage/residence.hpp"
#include "blockage/simulator.hpp"
