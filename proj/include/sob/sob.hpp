#ifndef SOB_SOB_HPP
#define SOB_SOB_HPP

#include "sob/align.hpp"
#include "sob/classify.hpp"
#include "sob/common.hpp"
#include "sob/frechet.hpp"
#include "sob/io.hpp"
#include "sob/kernel.hpp"
#include "sob/klds.hpp"
#include "sob/synth.hpp"

#endif
