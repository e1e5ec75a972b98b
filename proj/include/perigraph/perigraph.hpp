#pragma once

// Everything in one include.

#include "perigraph/errors.hpp"
#include "perigraph/expr.hpp"
#include "perigraph/graph.hpp"
#include "perigraph/quadrature.hpp"
#include "perigraph/functions.hpp"
#include "perigraph/mellin.hpp"
#include "perigraph/sio.hpp"
#include "perigraph/assemble.hpp"
#include "perigraph/section.hpp"
#include "perigraph/floquet.hpp"
#include "perigraph/fredholm.hpp"
#include "perigraph/io.hpp"
