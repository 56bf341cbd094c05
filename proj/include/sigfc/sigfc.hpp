#pragma once

#include "sigfc/error.hpp"
#include "sigfc/tensor_algebra.hpp"
#include "sigfc/signature.hpp"
#include "sigfc/sig_kernel.hpp"
#include "sigfc/regression.hpp"
#include "sigfc/dates.hpp"
#include "sigfc/pipeline.hpp"
#include "sigfc/io.hpp"
