#pragma once

#include "ulpac/experiment.hpp"
#include "ulpac/homotopy.hpp"
#include "ulpac/io.hpp"
#include "ulpac/jointspec.hpp"
#include "ulpac/matcore.hpp"
#include "ulpac/path.hpp"
#include "ulpac/pseudospec.hpp"
#include "ulpac/psra.hpp"
#include "ulpac/rng.hpp"
#include "ulpac/serialize.hpp"
#include "ulpac/unitary_correct.hpp"
#include "ulpac/varieties.hpp"
