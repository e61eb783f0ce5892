#pragma once

#include "gramtex/convolution.hpp"
#include "gramtex/error.hpp"
#include "gramtex/fft.hpp"
#include "gramtex/filter_bank.hpp"
#include "gramtex/filter_io.hpp"
#include "gramtex/gram.hpp"
#include "gramtex/netpbm.hpp"
#include "gramtex/nnls.hpp"
#include "gramtex/parallel.hpp"
#include "gramtex/random.hpp"
#include "gramtex/relu_theory.hpp"
#include "gramtex/rpn.hpp"
#include "gramtex/signal.hpp"
#include "gramtex/spectral_system.hpp"
#include "gramtex/synth.hpp"
