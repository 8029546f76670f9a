#ifndef RMTLAB_RMTLAB_HPP
#define RMTLAB_RMTLAB_HPP

#include "rmtlab/analytic.hpp"
#include "rmtlab/cli.hpp"
#include "rmtlab/entries.hpp"
#include "rmtlab/matrixlab.hpp"
#include "rmtlab/montecarlo.hpp"
#include "rmtlab/quadrature.hpp"
#include "rmtlab/report.hpp"
#include "rmtlab/rng.hpp"
#include "rmtlab/stats.hpp"
#include "rmtlab/verify.hpp"

#endif
