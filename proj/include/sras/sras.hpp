#ifndef SRAS_SRAS_HPP_
#define SRAS_SRAS_HPP_

#include "sras/dataio.hpp"
#include "sras/errors.hpp"
#include "sras/evalbench.hpp"
#include "sras/numcore.hpp"
#include "sras/policy.hpp"
#include "sras/reward.hpp"
#include "sras/scorer.hpp"
#include "sras/synthenv.hpp"
#include "sras/trainer.hpp"

#endif  // SRAS_SRAS_HPP_
