#pragma once

#include "cavent/cli.hpp"
#include "cavent/dynamics.hpp"
#include "cavent/emit.hpp"
#include "cavent/entangle.hpp"
#include "cavent/errors.hpp"
#include "cavent/feasibility.hpp"
#include "cavent/hilbert.hpp"
#include "cavent/parse.hpp"
#include "cavent/protocol.hpp"
#include "cavent/selfcheck.hpp"
