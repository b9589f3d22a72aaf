#pragma once

#include "parfix/errors.hpp"
#include "parfix/functionals.hpp"
#include "parfix/hilbert.hpp"
#include "parfix/operators.hpp"
#include "parfix/oracle.hpp"
#include "parfix/parallel.hpp"
#include "parfix/problem.hpp"
#include "parfix/schedule.hpp"
#include "parfix/schemes.hpp"
#include "parfix/selection.hpp"
#include "parfix/sets.hpp"
#include "parfix/trace_io.hpp"
