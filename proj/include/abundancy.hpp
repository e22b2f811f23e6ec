#ifndef ABUNDANCY_ALL_HPP
#define ABUNDANCY_ALL_HPP

#include "abundancy/arith.hpp"
#include "abundancy/qseries.hpp"
#include "abundancy/abundancy.hpp"
#include "abundancy/sieve.hpp"
#include "abundancy/perm_oracle.hpp"
#include "abundancy/genfunc.hpp"
#include "abundancy/limit_stats.hpp"
#include "abundancy/tori.hpp"

#endif  // ABUNDANCY_ALL_HPP
