#pragma once

#include "thoughtcards/cards.hpp"
#include "thoughtcards/commands.hpp"
#include "thoughtcards/config.hpp"
#include "thoughtcards/core.hpp"
#include "thoughtcards/dataset.hpp"
#include "thoughtcards/errors.hpp"
#include "thoughtcards/inference.hpp"
#include "thoughtcards/matching.hpp"
#include "thoughtcards/mcts.hpp"
#include "thoughtcards/providers/http.hpp"
#include "thoughtcards/providers/mock.hpp"
#include "thoughtcards/providers/provider.hpp"
#include "thoughtcards/toy.hpp"
