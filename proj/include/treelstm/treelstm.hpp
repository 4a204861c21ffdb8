#pragma once

#include "treelstm/baselines.hpp"
#include "treelstm/checkpoint.hpp"
#include "treelstm/complexity.hpp"
#include "treelstm/dataio.hpp"
#include "treelstm/errors.hpp"
#include "treelstm/experiment.hpp"
#include "treelstm/lstm_cell.hpp"
#include "treelstm/numeric.hpp"
#include "treelstm/presence.hpp"
#include "treelstm/sequence.hpp"
#include "treelstm/trainer.hpp"
#include "treelstm/tree_lstm.hpp"
