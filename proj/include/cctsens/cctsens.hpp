#ifndef CCTSENS_CCTSENS_HPP
#define CCTSENS_CCTSENS_HPP

#include "cctsens/cct.hpp"
#include "cctsens/csr.hpp"
#include "cctsens/equilibrium.hpp"
#include "cctsens/errors.hpp"
#include "cctsens/integrator.hpp"
#include "cctsens/model.hpp"
#include "cctsens/multimachine.hpp"
#include "cctsens/oracle.hpp"
#include "cctsens/scenario.hpp"
#include "cctsens/scenario_file.hpp"
#include "cctsens/sensitivity.hpp"
#include "cctsens/smib.hpp"

#endif  // CCTSENS_CCTSENS_HPP
