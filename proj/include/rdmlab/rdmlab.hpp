#pragma once

#include "rdmlab/core.hpp"
#include "rdmlab/optim.hpp"
#include "rdmlab/fock.hpp"
#include "rdmlab/rdm.hpp"
#include "rdmlab/xspace.hpp"
#include "rdmlab/functionals.hpp"
#include "rdmlab/density.hpp"
#include "rdmlab/random.hpp"
#include "rdmlab/models.hpp"
#include "rdmlab/bundle.hpp"
#include "rdmlab/report.hpp"
#include "rdmlab/sweep.hpp"
#include "rdmlab/checks.hpp"
