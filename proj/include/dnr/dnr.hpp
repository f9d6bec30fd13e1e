#pragma once

#include "dnr/error.hpp"
#include "dnr/network.hpp"
#include "dnr/topology.hpp"
#include "dnr/layout.hpp"
#include "dnr/model_dnr.hpp"
#include "dnr/model_aux.hpp"
#include "dnr/nlp.hpp"
#include "dnr/powerflow.hpp"
#include "dnr/nnls.hpp"
#include "dnr/kkt.hpp"
#include "dnr/search.hpp"
#include "dnr/sampling.hpp"
#include "dnr/report.hpp"
