#pragma once

#include "cubeint/error.hpp"
#include "cubeint/csv.hpp"
#include "cubeint/mdm.hpp"
#include "cubeint/engine.hpp"
#include "cubeint/coverage.hpp"
#include "cubeint/beliefs.hpp"
#include "cubeint/qlang.hpp"
#include "cubeint/context.hpp"
#include "cubeint/novelty.hpp"
#include "cubeint/relevance.hpp"
#include "cubeint/peculiarity.hpp"
#include "cubeint/surprise.hpp"
#include "cubeint/io.hpp"
#include "cubeint/generator.hpp"
#include "cubeint/report.hpp"
#include "cubeint/bench.hpp"
