#pragma once

#include "kbx/error.hpp"
#include "kbx/core.hpp"
#include "kbx/ingest.hpp"
#include "kbx/miner.hpp"
#include "kbx/models.hpp"
#include "kbx/oracle.hpp"
#include "kbx/hitting_set.hpp"
#include "kbx/explain.hpp"
#include "kbx/serialize.hpp"
#include "kbx/train.hpp"
#include "kbx/commands.hpp"
