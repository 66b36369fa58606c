#pragma once

#include "splinetool/error.hpp"
#include "splinetool/fit/oracle.hpp"
#include "splinetool/fit/problem.hpp"
#include "splinetool/fit/solver.hpp"
#include "splinetool/fit/tv1d.hpp"
#include "splinetool/io/json.hpp"
#include "splinetool/io/signal_io.hpp"
#include "splinetool/potentials.hpp"
#include "splinetool/pwl/curve.hpp"
#include "splinetool/pwl/grid.hpp"
#include "splinetool/pwl/spline.hpp"
#include "splinetool/recon/descent.hpp"
#include "splinetool/recon/filter_bank.hpp"
#include "splinetool/recon/metrics.hpp"
#include "splinetool/recon/nonlinearity.hpp"
#include "splinetool/recon/operators.hpp"
#include "splinetool/recon/parallel.hpp"
#include "splinetool/recon/prox_grad.hpp"
#include "splinetool/recon/signal.hpp"
#include "splinetool/recon/training.hpp"
#include "splinetool/slope_constraints.hpp"
