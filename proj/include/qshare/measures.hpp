// Entanglement and correlation measures.
#pragma once

#include "qshare/measures/classical.hpp"
#include "qshare/measures/entropy.hpp"
#include "qshare/measures/roof.hpp"
#include "qshare/measures/types.hpp"
