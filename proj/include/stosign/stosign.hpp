#pragma once

#include "stosign/dense_vector.hpp"
#include "stosign/experiment.hpp"
#include "stosign/geometry.hpp"
#include "stosign/nonconvex_driver.hpp"
#include "stosign/online_learner.hpp"
#include "stosign/practical_optimizers.hpp"
#include "stosign/problems.hpp"
#include "stosign/rng.hpp"
#include "stosign/run_record.hpp"
#include "stosign/sign_ops.hpp"
