#pragma once

#include "kernsdr/common.hpp"
#include "kernsdr/kernels.hpp"
#include "kernsdr/eigensolve.hpp"
#include "kernsdr/dataset.hpp"
#include "kernsdr/kaplan_meier.hpp"
#include "kernsdr/slicing.hpp"
#include "kernsdr/hazard_smoothing.hpp"
#include "kernsdr/regularization.hpp"
#include "kernsdr/rdsir_stages.hpp"
#include "kernsdr/tuning.hpp"
#include "kernsdr/rdsir.hpp"
#include "kernsdr/simgen.hpp"
#include "kernsdr/assoc_eval.hpp"
#include "kernsdr/benchmark.hpp"
#include "kernsdr/io.hpp"
