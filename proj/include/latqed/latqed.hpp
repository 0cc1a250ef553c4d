#pragma once

#include "latqed/bands.hpp"
#include "latqed/chain.hpp"
#include "latqed/config.hpp"
#include "latqed/csv.hpp"
#include "latqed/dynamics.hpp"
#include "latqed/error.hpp"
#include "latqed/manybody.hpp"
#include "latqed/oracles.hpp"
#include "latqed/parallel.hpp"
#include "latqed/scenario.hpp"
#include "latqed/spectral.hpp"
#include "latqed/version.hpp"
