#ifndef SEMLOC_SEMLOC_HPP_
#define SEMLOC_SEMLOC_HPP_

#include "semloc/alignment.hpp"
#include "semloc/alignment_report.hpp"
#include "semloc/bus.hpp"
#include "semloc/combiner.hpp"
#include "semloc/config.hpp"
#include "semloc/engine.hpp"
#include "semloc/phrases.hpp"
#include "semloc/proximity.hpp"
#include "semloc/ranging_sim.hpp"
#include "semloc/room.hpp"
#include "semloc/service.hpp"
#include "semloc/sod.hpp"
#include "semloc/study.hpp"
#include "semloc/types.hpp"

#endif  // SEMLOC_SEMLOC_HPP_
